//! Exponential rate fits by least squares on `ln(value)`.

use crate::error::{Error, Result};
use crate::scalar::{as_f64, count, tree_sum_by, Scalar};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit<T> {
    /// `λ` in `value ≈ exp(intercept − λ t)`.
    pub rate: T,
    pub intercept: T,
    pub r_squared: T,
    pub window: (T, T),
}

/// Fits `ln v = a − λ t` over the samples with `t ∈ [window.0, window.1]`.
pub fn fit_decay_rate<T: Scalar>(times: &[T], values: &[T], window: (T, T)) -> Result<RateFit<T>> {
    if times.len() != values.len() {
        return Err(Error::InvalidParameter("times and values differ in length".into()));
    }
    if !(window.0 < window.1) {
        return Err(Error::InvalidParameter("empty fit window".into()));
    }
    let mut ts = Vec::new();
    let mut ys = Vec::new();
    for (&t, &v) in times.iter().zip(values) {
        if t < window.0 || t > window.1 {
            continue;
        }
        if !(v > T::zero()) {
            return Err(Error::NonPositiveValues(as_f64(v)));
        }
        ts.push(t);
        ys.push(v.ln());
    }
    if ts.len() < 5 {
        return Err(Error::InsufficientSamples(ts.len()));
    }
    let n = count::<T>(ts.len());
    let tm = tree_sum_by(ts.iter(), |&t| t) / n;
    let ym = tree_sum_by(ys.iter(), |&y| y) / n;
    let stt = tree_sum_by(ts.iter(), |&t| (t - tm) * (t - tm));
    let sty = tree_sum_by(0..ts.len(), |i| (ts[i] - tm) * (ys[i] - ym));
    let syy = tree_sum_by(ys.iter(), |&y| (y - ym) * (y - ym));
    let slope = sty / stt;
    let intercept = ym - slope * tm;
    let residual = tree_sum_by(0..ts.len(), |i| {
        let r = ys[i] - intercept - slope * ts[i];
        r * r
    });
    let r_squared = if syy > T::zero() {
        T::one() - residual / syy
    } else {
        T::one()
    };
    Ok(RateFit {
        rate: -slope,
        intercept,
        r_squared,
        window,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Vec<f64> {
        (0..=100).map(|i| i as f64 * 0.05).collect()
    }

    #[test]
    fn exact_exponential() {
        let t = grid();
        let v: Vec<f64> = t.iter().map(|t| 3.0 * (-2.0 * t).exp()).collect();
        let fit = fit_decay_rate(&t, &v, (0.0, 5.0)).unwrap();
        assert!((fit.rate - 2.0).abs() < 1e-9);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn perturbed_exponential() {
        let t = grid();
        let v: Vec<f64> = t.iter().map(|t| (-2.0 * t).exp() * (1.0 + 0.01 * t.sin())).collect();
        let fit = fit_decay_rate(&t, &v, (0.0, 5.0)).unwrap();
        assert!((fit.rate - 2.0).abs() < 0.02);
    }

    #[test]
    fn constant_series() {
        let t = grid();
        let fit = fit_decay_rate(&t, &vec![0.7; t.len()], (0.0, 5.0)).unwrap();
        assert!(fit.rate.abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        let t = grid();
        let mut v = vec![1.0; t.len()];
        v[3] = 0.0;
        assert!(matches!(fit_decay_rate(&t, &v, (0.0, 5.0)), Err(Error::NonPositiveValues(_))));
        assert!(matches!(
            fit_decay_rate(&t, &vec![1.0; t.len()], (0.0, 0.1)),
            Err(Error::InsufficientSamples(3))
        ));
    }
}
