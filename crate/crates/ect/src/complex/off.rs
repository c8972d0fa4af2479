//! OFF reader/writer and a minimal OBJ reader for triangle meshes.

use std::collections::HashMap;

use crate::error::{EctError, Result};

use super::EmbeddedComplex;

fn parse_err(line: usize, msg: impl Into<String>) -> EctError {
    EctError::Parse { line, msg: msg.into() }
}

/// Lines paired with their 1-based line numbers, comments and blanks removed.
fn significant_lines(text: &str) -> Vec<(usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .collect()
}

/// Parses ASCII OFF: header "OFF", a counts line "V F E", V coordinate
/// lines and F triangle lines "3 i j k". Duplicate vertices (bit-identical
/// coordinates) and duplicate faces are eliminated; the returned complex is
/// the face closure of the listed triangles.
pub fn parse_off(text: &str) -> Result<EmbeddedComplex> {
    let lines = significant_lines(text);
    let mut it = lines.iter();
    let &(header_line, header) = it.next().ok_or_else(|| parse_err(1, "empty OFF input"))?;
    if header != "OFF" {
        return Err(parse_err(header_line, format!("expected OFF header, found {header:?}")));
    }
    let &(counts_line, counts) =
        it.next().ok_or_else(|| parse_err(header_line, "missing counts line"))?;
    let counts: Vec<usize> = counts
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| parse_err(counts_line, format!("bad count {t:?}"))))
        .collect::<Result<_>>()?;
    if counts.len() != 3 {
        return Err(parse_err(counts_line, "counts line must be \"V F E\""));
    }
    let (nv, nf) = (counts[0], counts[1]);

    let mut raw_vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let &(ln, line) =
            it.next().ok_or_else(|| parse_err(counts_line, "fewer vertex lines than declared"))?;
        let coords: Vec<f64> = line
            .split_whitespace()
            .take(3)
            .map(|t| t.parse().map_err(|_| parse_err(ln, format!("bad coordinate {t:?}"))))
            .collect::<Result<_>>()?;
        if coords.len() != 3 {
            return Err(parse_err(ln, "vertex line needs 3 coordinates"));
        }
        raw_vertices.push(coords);
    }

    // Deduplicate bit-identical vertices and remap indices.
    let mut key_to_new: HashMap<[u64; 3], usize> = HashMap::new();
    let mut remap = Vec::with_capacity(nv);
    let mut vertices: Vec<Vec<f64>> = Vec::new();
    for v in &raw_vertices {
        let key = [v[0].to_bits(), v[1].to_bits(), v[2].to_bits()];
        let idx = *key_to_new.entry(key).or_insert_with(|| {
            vertices.push(v.clone());
            vertices.len() - 1
        });
        remap.push(idx);
    }

    let mut faces: Vec<Vec<usize>> = Vec::with_capacity(nf);
    for _ in 0..nf {
        let &(ln, line) =
            it.next().ok_or_else(|| parse_err(counts_line, "fewer face lines than declared"))?;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.first() != Some(&"3") {
            return Err(parse_err(ln, "only triangle faces (\"3 i j k\") are supported"));
        }
        if toks.len() < 4 {
            return Err(parse_err(ln, "face line needs 3 vertex indices"));
        }
        let mut face = Vec::with_capacity(3);
        for t in &toks[1..4] {
            let i: usize = t.parse().map_err(|_| parse_err(ln, format!("bad index {t:?}")))?;
            if i >= nv {
                return Err(parse_err(ln, format!("vertex index {i} out of range (V = {nv})")));
            }
            face.push(remap[i]);
        }
        faces.push(face);
    }
    if it.next().is_some() {
        return Err(parse_err(counts_line, "more lines than declared by the counts"));
    }
    EmbeddedComplex::new(3, vertices, faces)
}

/// Writes a triangle mesh (top dimension <= 2, every edge contained in a
/// triangle) as ASCII OFF with coordinates at 17 significant digits.
pub fn emit_off(complex: &EmbeddedComplex) -> Result<String> {
    if complex.top_dim() > 2 {
        return Err(EctError::Argument(
            "OFF output supports only complexes of top dimension <= 2".into(),
        ));
    }
    for edge in complex.simplices(1) {
        let in_triangle = complex
            .simplices(2)
            .iter()
            .any(|f| edge.iter().all(|v| f.contains(v)));
        if !in_triangle {
            return Err(EctError::Argument(format!(
                "edge {edge:?} is not contained in any triangle; OFF cannot represent it"
            )));
        }
    }
    let mut out = String::from("OFF\n");
    out.push_str(&format!(
        "{} {} {}\n",
        complex.num_vertices(),
        complex.simplices(2).len(),
        complex.simplices(1).len()
    ));
    for v in complex.vertices() {
        out.push_str(&format!("{:.16e} {:.16e} {:.16e}\n", v[0], v[1], v[2]));
    }
    for f in complex.simplices(2) {
        out.push_str(&format!("3 {} {} {}\n", f[0], f[1], f[2]));
    }
    Ok(out)
}

/// Parses Wavefront OBJ, honoring only `v` and `f` lines (triangles, 1-based
/// indices, `i/j/k` attribute suffixes ignored).
pub fn parse_obj(text: &str) -> Result<EmbeddedComplex> {
    let mut vertices: Vec<Vec<f64>> = Vec::new();
    let mut faces: Vec<Vec<usize>> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let line = raw.trim();
        let mut toks = line.split_whitespace();
        match toks.next() {
            Some("v") => {
                let coords: Vec<f64> = toks
                    .take(3)
                    .map(|t| t.parse().map_err(|_| parse_err(ln, format!("bad coordinate {t:?}"))))
                    .collect::<Result<_>>()?;
                if coords.len() != 3 {
                    return Err(parse_err(ln, "v line needs 3 coordinates"));
                }
                vertices.push(coords);
            }
            Some("f") => {
                let idx: Vec<usize> = toks
                    .map(|t| {
                        let head = t.split('/').next().unwrap_or(t);
                        head.parse::<usize>()
                            .map_err(|_| parse_err(ln, format!("bad face index {t:?}")))
                    })
                    .collect::<Result<_>>()?;
                if idx.len() != 3 {
                    return Err(parse_err(ln, "only triangle faces are supported"));
                }
                let mut face = Vec::with_capacity(3);
                for i1 in idx {
                    if i1 == 0 || i1 > vertices.len() {
                        return Err(parse_err(ln, format!("face index {i1} out of range")));
                    }
                    face.push(i1 - 1);
                }
                faces.push(face);
            }
            _ => {}
        }
    }
    EmbeddedComplex::new(3, vertices, faces)
}
