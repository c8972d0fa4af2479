//! The per-direction convolution head: three valid 1D convolutions with
//! kernel 5 and stride 2, LeakyReLU between them, and a global max pool.
//! Implemented as im2col + matrix products, batched over all directions.

use ndarray::{Array1, Array2, ArrayView2, Axis};

use super::ModelParams;
use crate::error::{EctError, Result};

pub const KERNEL: usize = 5;
pub const STRIDE: usize = 2;

/// Output length of one valid convolution: floor((len - 5)/2) + 1.
pub fn conv_out_len(len: usize) -> Result<usize> {
    if len < KERNEL {
        return Err(EctError::Shape(format!(
            "input length {len} is shorter than the kernel width {KERNEL}"
        )));
    }
    Ok((len - KERNEL) / STRIDE + 1)
}

/// Intermediate lengths (L1, L2, L3) of the three-convolution stack; errors
/// when t < 29 (the smallest input admitting all three).
pub fn head_output_lengths(t: usize) -> Result<(usize, usize, usize)> {
    let l1 = conv_out_len(t)?;
    let l2 = conv_out_len(l1)?;
    let l3 = conv_out_len(l2)?;
    Ok((l1, l2, l3))
}

fn leaky(x: f64, slope: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        slope * x
    }
}

fn leaky_grad(x: f64, slope: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else {
        slope
    }
}

/// Everything the backward pass needs, for all `n` directions at once.
/// Position-major layout: matrices hold sample s's window j in global
/// column s * L + j.
pub struct HeadCache {
    pub n: usize,
    pub lengths: (usize, usize, usize),
    /// (5, n*L1)
    pub cols1: Array2<f64>,
    /// (C, n*L1), pre-activation
    pub a1: Array2<f64>,
    /// (C*5, n*L2)
    pub cols2: Array2<f64>,
    pub a2: Array2<f64>,
    /// (C*5, n*L3)
    pub cols3: Array2<f64>,
    pub a3: Array2<f64>,
    /// (n, C): global a3 column of each channel's max
    pub argmax: Vec<Vec<usize>>,
    /// (n, C): pooled head output
    pub h: Array2<f64>,
}

fn kernel_flat(w: &ndarray::Array3<f64>) -> ArrayView2<'_, f64> {
    let (out, cin, k) = w.dim();
    w.view().into_shape_with_order((out, cin * k)).expect("contiguous kernel")
}

/// im2col for a (C_in, n*L_in) activation map laid out sample-major:
/// output column s*L_out + j stacks the window starting at 2j of sample s.
fn im2col(z: &Array2<f64>, n: usize, l_in: usize, l_out: usize) -> Array2<f64> {
    let c_in = z.nrows();
    let mut cols = Array2::zeros((c_in * KERNEL, n * l_out));
    for s in 0..n {
        for j in 0..l_out {
            let g = s * l_out + j;
            let start = s * l_in + STRIDE * j;
            for cin in 0..c_in {
                for k in 0..KERNEL {
                    cols[(cin * KERNEL + k, g)] = z[(cin, start + k)];
                }
            }
        }
    }
    cols
}

/// Scatter-add of column gradients back onto the activation map (the
/// adjoint of `im2col`).
fn col2im_add(dcols: &Array2<f64>, n: usize, l_in: usize, l_out: usize, dz: &mut Array2<f64>) {
    let c_in = dz.nrows();
    for s in 0..n {
        for j in 0..l_out {
            let g = s * l_out + j;
            let start = s * l_in + STRIDE * j;
            for cin in 0..c_in {
                for k in 0..KERNEL {
                    dz[(cin, start + k)] += dcols[(cin * KERNEL + k, g)];
                }
            }
        }
    }
}

/// Forward pass of the head for all directions: `curves` is (n, t). Returns
/// the cache whose `h` field is the (n, channels) pooled output.
pub fn head_forward(curves: &Array2<f64>, p: &ModelParams, slope: f64) -> Result<HeadCache> {
    let (n, t) = curves.dim();
    let (l1, l2, l3) = head_output_lengths(t)?;
    let c = p.channels;

    // Conv 1: single input channel read straight from the curves.
    let mut cols1 = Array2::zeros((KERNEL, n * l1));
    for s in 0..n {
        for j in 0..l1 {
            for k in 0..KERNEL {
                cols1[(k, s * l1 + j)] = curves[(s, STRIDE * j + k)];
            }
        }
    }
    let mut a1 = kernel_flat(&p.conv1_w).dot(&cols1);
    a1 += &p.conv1_b.view().insert_axis(Axis(1));
    let z1 = a1.mapv(|x| leaky(x, slope));

    let cols2 = im2col(&z1, n, l1, l2);
    let mut a2 = kernel_flat(&p.conv2_w).dot(&cols2);
    a2 += &p.conv2_b.view().insert_axis(Axis(1));
    let z2 = a2.mapv(|x| leaky(x, slope));

    let cols3 = im2col(&z2, n, l2, l3);
    let mut a3 = kernel_flat(&p.conv3_w).dot(&cols3);
    a3 += &p.conv3_b.view().insert_axis(Axis(1));

    // Global max pool over the l3 positions of each sample.
    let mut h = Array2::zeros((n, c));
    let mut argmax = vec![vec![0usize; c]; n];
    for s in 0..n {
        for ch in 0..c {
            let mut best = f64::NEG_INFINITY;
            let mut best_g = s * l3;
            for j in 0..l3 {
                let g = s * l3 + j;
                if a3[(ch, g)] > best {
                    best = a3[(ch, g)];
                    best_g = g;
                }
            }
            h[(s, ch)] = best;
            argmax[s][ch] = best_g;
        }
    }
    Ok(HeadCache { n, lengths: (l1, l2, l3), cols1, a1, cols2, a2, cols3, a3, argmax, h })
}

/// Head output for a single curve.
pub fn translation_head_forward(
    curve: &[f64],
    p: &ModelParams,
    slope: f64,
) -> Result<Array1<f64>> {
    let x = Array2::from_shape_vec((1, curve.len()), curve.to_vec())
        .expect("shape matches by construction");
    let cache = head_forward(&x, p, slope)?;
    Ok(cache.h.row(0).to_owned())
}

/// Backpropagates `dh` (n, channels) through the head, accumulating into
/// the convolution fields of `grads`. The gradient with respect to the
/// input curves is not needed (curves are data) and is not computed.
pub fn head_backward(
    cache: &HeadCache,
    p: &ModelParams,
    slope: f64,
    dh: &Array2<f64>,
    grads: &mut ModelParams,
) {
    let (n, c) = dh.dim();
    let (l1, l2, l3) = cache.lengths;
    let ck = c * KERNEL;
    let w3 = kernel_flat(&p.conv3_w);

    // Max pool routes each channel's gradient to its argmax column; conv3's
    // backward therefore touches only n*c of the n*l3 columns.
    let mut dz2 = Array2::zeros((c, n * l2));
    for s in 0..n {
        for ch in 0..c {
            let g = cache.argmax[s][ch];
            let dv = dh[(s, ch)];
            if dv == 0.0 {
                continue;
            }
            grads.conv3_b[ch] += dv;
            let col = cache.cols3.column(g);
            let mut w3_row = grads.conv3_w.index_axis_mut(Axis(0), ch);
            let w3_row = w3_row.as_slice_mut().expect("contiguous");
            let j = g - s * l3;
            let start = s * l2 + STRIDE * j;
            for r in 0..ck {
                w3_row[r] += dv * col[r];
                dz2[(r / KERNEL, start + r % KERNEL)] += dv * w3[(ch, r)];
            }
        }
    }

    let da2 = &dz2 * &cache.a2.mapv(|x| leaky_grad(x, slope));
    for (chb, row) in grads.conv2_b.iter_mut().zip(da2.rows()) {
        *chb += row.sum();
    }
    {
        let dw2 = da2.dot(&cache.cols2.t());
        let mut w2_grad = grads.conv2_w.view_mut().into_shape_with_order((c, ck)).unwrap();
        w2_grad += &dw2;
    }
    let dcols2 = kernel_flat(&p.conv2_w).t().dot(&da2);
    let mut dz1 = Array2::zeros((c, n * l1));
    col2im_add(&dcols2, n, l1, l2, &mut dz1);

    let da1 = &dz1 * &cache.a1.mapv(|x| leaky_grad(x, slope));
    for (chb, row) in grads.conv1_b.iter_mut().zip(da1.rows()) {
        *chb += row.sum();
    }
    let dw1 = da1.dot(&cache.cols1.t());
    let mut w1_grad = grads.conv1_w.view_mut().into_shape_with_order((c, KERNEL)).unwrap();
    w1_grad += &dw1;
}

/// Elementwise LeakyReLU used between the graph layers too.
pub fn leaky_relu(x: &Array2<f64>, slope: f64) -> Array2<f64> {
    x.mapv(|v| leaky(v, slope))
}

pub fn leaky_relu_grad(x: &Array2<f64>, slope: f64) -> Array2<f64> {
    x.mapv(|v| leaky_grad(v, slope))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stride_length_arithmetic() {
        assert_eq!(head_output_lengths(512).unwrap(), (254, 125, 61));
        assert_eq!(head_output_lengths(256).unwrap(), (126, 61, 29));
        assert_eq!(head_output_lengths(29).unwrap(), (13, 5, 1));
        assert!(head_output_lengths(28).is_err());
    }

    #[test]
    fn zero_input_yields_bias_constant() {
        let p = ModelParams::init(8, 1);
        let short = translation_head_forward(&vec![0.0; 64], &p, 0.01).unwrap();
        let long = translation_head_forward(&vec![0.0; 200], &p, 0.01).unwrap();
        // Constant feature maps: pooled output is length-independent.
        for (a, b) in short.iter().zip(long.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn eight_bin_shift_invariance_with_margins() {
        let p = ModelParams::init(8, 2);
        let t = 128;
        // A bump with >= 32 bins of constant values at both ends.
        let mut base = vec![0.0f64; t];
        for i in 40..70 {
            base[i] = ((i - 40) as f64 * 0.3).sin() + 1.0;
        }
        let mut shifted = vec![0.0f64; t];
        for i in 0..t {
            if (8..t).contains(&i) {
                shifted[i] = base[i - 8];
            }
        }
        let a = translation_head_forward(&base, &p, 0.01).unwrap();
        let b = translation_head_forward(&shifted, &p, 0.01).unwrap();
        for (x, y) in a.iter().zip(b.iter()) {
            assert!((x - y).abs() < 1e-12, "{x} vs {y}");
        }
    }

    #[test]
    fn forward_is_deterministic() {
        let p = ModelParams::init(8, 3);
        let curve: Vec<f64> = (0..64).map(|i| (i as f64 * 0.1).cos()).collect();
        let a = translation_head_forward(&curve, &p, 0.01).unwrap();
        let b = translation_head_forward(&curve, &p, 0.01).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn batched_forward_matches_single() {
        let p = ModelParams::init(8, 4);
        let n = 5;
        let t = 64;
        let mut curves = Array2::zeros((n, t));
        for s in 0..n {
            for i in 0..t {
                curves[(s, i)] = ((s * t + i) as f64 * 0.05).sin();
            }
        }
        let cache = head_forward(&curves, &p, 0.01).unwrap();
        for s in 0..n {
            let single =
                translation_head_forward(curves.row(s).as_slice().unwrap(), &p, 0.01).unwrap();
            for ch in 0..8 {
                assert!((cache.h[(s, ch)] - single[ch]).abs() < 1e-14);
            }
        }
    }
}
