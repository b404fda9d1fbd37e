//! Composite Simpson weights on uniform grids.

use crate::error::{Error, Result};

/// Weights for `n + 1` equally spaced nodes with spacing `h`.
///
/// Even `n` uses the composite 1-4-2-...-4-1 rule; odd `n >= 3` applies it on
/// the first `n - 3` intervals and Simpson's 3/8 rule on the last three.
pub fn simpson_weights(n_intervals: usize, h: f64) -> Result<Vec<f64>> {
    let n = n_intervals;
    if n < 2 {
        return Err(Error::GridTooCoarse(format!(
            "Simpson quadrature needs at least 3 samples, got {}",
            n + 1
        )));
    }
    let mut w = vec![0.0; n + 1];
    let simpson_end = if n.is_multiple_of(2) { n } else { n - 3 };
    if simpson_end > 0 {
        for (i, wi) in w.iter_mut().enumerate().take(simpson_end + 1) {
            *wi = if i == 0 || i == simpson_end {
                h / 3.0
            } else if i % 2 == 1 {
                4.0 * h / 3.0
            } else {
                2.0 * h / 3.0
            };
        }
    }
    if n % 2 == 1 {
        let s = n - 3;
        for (k, c) in [1.0, 3.0, 3.0, 1.0].into_iter().enumerate() {
            w[s + k] += 3.0 * h / 8.0 * c;
        }
    }
    Ok(w)
}

/// Running integrals `G_j = int_0^{s_j} g` for samples `g_0..g_n`.
///
/// Even nodes carry the composite Simpson value; odd nodes add the
/// third-order one-interval rule `h/12 (5 g_{j-1} + 8 g_j - g_{j+1})`
/// (mirrored at the last node when it is odd). For `i <= j - 2` the weight of
/// `g_i` in `G_j` equals its weight in the full-range [`simpson_weights`].
pub fn cumulative_simpson(g: &[f64], h: f64) -> Vec<f64> {
    let n = g.len().saturating_sub(1);
    let mut out = vec![0.0; g.len()];
    if n == 0 {
        return out;
    }
    if n == 1 {
        out[1] = 0.5 * h * (g[0] + g[1]);
        return out;
    }
    let mut even_acc = 0.0;
    for j in 1..=n {
        if j % 2 == 0 {
            even_acc += h / 3.0 * (g[j - 2] + 4.0 * g[j - 1] + g[j]);
            out[j] = even_acc;
        } else if j < n {
            out[j] = even_acc + h / 12.0 * (5.0 * g[j - 1] + 8.0 * g[j] - g[j + 1]);
        } else {
            out[j] = even_acc + h / 12.0 * (-g[j - 2] + 8.0 * g[j - 1] + 5.0 * g[j]);
        }
    }
    out
}
