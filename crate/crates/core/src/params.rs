//! Flat views over trainable parameters.
//!
//! Optimizers and the finite-difference oracle only ever see a model as an
//! ordered list of `f64` slices. Gradients expose the same list in the same
//! order, so slice `i` of a gradient always lines up with slice `i` of the
//! parameters it was computed for.

pub trait Parameters {
    fn param_slices(&self) -> Vec<&[f64]>;

    fn param_slices_mut(&mut self) -> Vec<&mut [f64]>;

    fn num_params(&self) -> usize {
        self.param_slices().iter().map(|s| s.len()).sum()
    }

    /// Copies every parameter into one contiguous vector.
    fn flatten(&self) -> Vec<f64> {
        self.param_slices().concat()
    }
}

/// Central-difference gradient of `loss` with respect to every parameter.
///
/// Each parameter is perturbed in place by `±step` and restored afterwards;
/// the returned vectors follow [`Parameters::param_slices`] order.
pub fn central_difference<P, F>(params: &mut P, step: f64, mut loss: F) -> Vec<Vec<f64>>
where
    P: Parameters + ?Sized,
    F: FnMut(&P) -> f64,
{
    let lens: Vec<usize> = params.param_slices().iter().map(|s| s.len()).collect();
    let mut grads = Vec::with_capacity(lens.len());
    for (slice, &len) in lens.iter().enumerate() {
        let mut g = vec![0.0; len];
        for (k, gk) in g.iter_mut().enumerate() {
            let original = params.param_slices_mut()[slice][k];
            params.param_slices_mut()[slice][k] = original + step;
            let plus = loss(params);
            params.param_slices_mut()[slice][k] = original - step;
            let minus = loss(params);
            params.param_slices_mut()[slice][k] = original;
            *gk = (plus - minus) / (2.0 * step);
        }
        grads.push(g);
    }
    grads
}

/// Largest relative discrepancy between two gradient lists.
///
/// `|a - b| / max(|a|, |b|, floor)`; the floor keeps gradients that are zero
/// up to rounding from dominating the ratio.
pub fn max_relative_error(a: &[Vec<f64>], b: &[Vec<f64>], floor: f64) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(&x, &y)| (x - y).abs() / x.abs().max(y.abs()).max(floor))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Quadratic(Vec<f64>);

    impl Parameters for Quadratic {
        fn param_slices(&self) -> Vec<&[f64]> {
            vec![&self.0]
        }
        fn param_slices_mut(&mut self) -> Vec<&mut [f64]> {
            vec![&mut self.0]
        }
    }

    #[test]
    fn central_difference_is_second_order() {
        // f(w) = w^3, f'(2) = 12; central error is step^2 * f'''/6 = step^2.
        let mut q = Quadratic(vec![2.0]);
        for step in [1e-2, 1e-3] {
            let g = central_difference(&mut q, step, |p| p.0[0].powi(3));
            assert!((g[0][0] - 12.0 - step * step).abs() < 1e-9);
        }
        assert_eq!(q.0[0], 2.0);
    }

    #[test]
    fn relative_error_uses_floor() {
        let a = vec![vec![1e-12, 1.0]];
        let b = vec![vec![0.0, 1.0 + 1e-6]];
        let e = max_relative_error(&a, &b, 1e-6);
        assert!(e < 2e-6, "{e}");
    }
}
