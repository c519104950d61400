//! Statistics of the chaos solution.
//!
//! Both the full and the reduced models report statistics of the mean
//! field (the `r = 0` Legendre slice), so the curves are directly
//! comparable:
//! `E(t) = (1/2) Σ_k 2π |u_{k0}|²` and `G(t) = Σ_k 2π k² |u_{k0}|²`.

use crate::chaos::ChaosState;
use crate::field::FourierField;
use crate::scalar::{cast, cast_i64, Real};

/// Mean energy `E = (1/2) Σ_k 2π |u_k|²`.
pub fn mean_energy<T: Real>(u: &FourierField<T>) -> T {
    let two_pi = cast::<T>(2.0) * T::PI();
    let sum = u
        .iter()
        .fold(T::zero(), |acc, (_, amp)| acc + two_pi * amp.norm_sqr());
    sum * cast::<T>(0.5)
}

/// Mean squared gradient norm `G = Σ_k 2π k² |u_k|²`.
pub fn mean_grad_sq<T: Real>(u: &FourierField<T>) -> T {
    let two_pi = cast::<T>(2.0) * T::PI();
    u.iter().fold(T::zero(), |acc, (k, amp)| {
        let k_t = cast_i64::<T>(k);
        acc + two_pi * k_t * k_t * amp.norm_sqr()
    })
}

/// Per-mode variance of the chaos expansion:
/// `Var_k = Σ_{r >= 1} |u_{kr}|² / (2r + 1)`, indexed like the field
/// storage (`i` holds mode `k = i - N/2`).
pub fn variance_per_mode<T: Real>(state: &ChaosState<T>) -> Vec<T> {
    let n = state.mode_count();
    let mut var = vec![T::zero(); n];
    for r in 1..state.polynomial_count() {
        let norm = cast::<T>((2 * r + 1) as f64);
        for (i, amp) in state.slice(r).amplitudes().iter().enumerate() {
            var[i] += amp.norm_sqr() / norm;
        }
    }
    var
}

/// Scalar time series (e.g. `E(t)` or `G(t)`).
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries<T> {
    pub times: Vec<T>,
    pub values: Vec<T>,
}

impl<T: Real> TimeSeries<T> {
    pub fn new(times: Vec<T>, values: Vec<T>) -> Self {
        assert_eq!(times.len(), values.len());
        Self { times, values }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Moment series produced by the solvers: `E(t)` and `G(t)` on a shared
/// time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSeries<T> {
    pub times: Vec<T>,
    pub energy: Vec<T>,
    pub grad_sq: Vec<T>,
}

impl<T: Real> MomentSeries<T> {
    /// Builds the series from mean-field snapshots.
    pub fn from_fields(times: Vec<T>, fields: &[FourierField<T>]) -> Self {
        assert_eq!(times.len(), fields.len());
        Self {
            energy: fields.iter().map(mean_energy).collect(),
            grad_sq: fields.iter().map(mean_grad_sq).collect(),
            times,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chaos::ChaosState;
    use num_complex::Complex;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn energy_examples() {
        assert_eq!(mean_energy(&FourierField::<f64>::zeros(8)), 0.0);

        let sine = FourierField::<f64>::sine(96);
        assert!((mean_energy(&sine) - PI / 2.0).abs() < 1e-14);

        // Scaling the field by c multiplies E by c².
        let mut scaled = FourierField::<f64>::zeros(96);
        for (k, amp) in sine.iter() {
            scaled.set(k, amp * 3.0);
        }
        assert!((mean_energy(&scaled) - 9.0 * mean_energy(&sine)).abs() < 1e-12);
    }

    #[test]
    fn grad_sq_examples() {
        assert_eq!(mean_grad_sq(&FourierField::<f64>::zeros(8)), 0.0);

        let sine = FourierField::<f64>::sine(96);
        assert!((mean_grad_sq(&sine) - PI).abs() < 1e-14);

        let constant = FourierField::from_modes(8, &[(0, c(4.0, 0.0))]).unwrap();
        assert_eq!(mean_grad_sq(&constant), 0.0);
    }

    #[test]
    fn variance_examples() {
        let sine = FourierField::<f64>::sine(8);
        let state = ChaosState::make_initial(&sine, 4).unwrap();
        assert!(variance_per_mode(&state).iter().all(|&v| v == 0.0));

        let mut with_r1 = state.clone();
        with_r1.slice_mut(1).set(2, c(0.3, 0.4));
        let var = variance_per_mode(&with_r1);
        let idx = (2 + 4) as usize;
        assert!((var[idx] - 0.25 / 3.0).abs() < 1e-15);
        assert!(var
            .iter()
            .enumerate()
            .all(|(i, &v)| i == idx || v == 0.0));
    }

    proptest! {
        #[test]
        fn parseval_type_bound(vals in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 16)) {
            // G(u) <= k_max² · 2 E(u) with k_max = N/2.
            let field = FourierField::from_amplitudes(
                vals.into_iter().map(|(re, im)| c(re, im)).collect(),
            );
            let k_max = (field.mode_count() / 2) as f64;
            prop_assert!(mean_grad_sq(&field) <= k_max * k_max * 2.0 * mean_energy(&field) + 1e-12);
        }
    }
}
