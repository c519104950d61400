//! The full Fourier-Legendre Galerkin system for Burgers with uncertain
//! viscosity.
//!
//! With `u_k(t, ξ) ≈ Σ_{r<M} u_{kr}(t) L_r(ξ)` and
//! `ν(ξ) = ν₀ + ν₁ ξ`, Galerkin projection gives
//!
//! `du_{kr}/dt = -(ik/2) Σ_{l,m} Σ_{p+q=k} u_{pl} u_{qm} c_{lmr}
//!              - k² Σ_{l∈{0,1}} Σ_m ν_l u_{km} c_{lmr}`,
//!
//! where the viscous `l`-sum collapses to `{0, 1}` because the viscosity
//! expansion has degree one.

use num_complex::Complex;

use crate::basis::TripleTensor;
use crate::error::{Error, Result};
use crate::field::FourierField;
use crate::scalar::{cast, cast_i64, Real};
use crate::timestep::OdeState;

/// Degree-one Legendre expansion of the uncertain viscosity
/// `ν(ξ) = ν₀ + ν₁ ξ` with `ξ ~ U[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViscosityExpansion<T> {
    nu0: T,
    nu1: T,
}

impl<T: Real> ViscosityExpansion<T> {
    /// Requires `ν₁ >= 0` and `ν₀ - ν₁ > 0` so the viscosity stays
    /// positive over the whole range of `ξ`.
    pub fn new(nu0: T, nu1: T) -> Result<Self> {
        if nu1 < T::zero() || nu0 - nu1 <= T::zero() {
            return Err(Error::InvalidViscosity {
                nu0: nu0.to_f64().unwrap_or(f64::NAN),
                nu1: nu1.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(Self { nu0, nu1 })
    }

    /// Mean viscosity `ν₀`.
    pub fn nu0(&self) -> T {
        self.nu0
    }

    /// Uncertainty amplitude `ν₁` (the paper's `α`).
    pub fn nu1(&self) -> T {
        self.nu1
    }

    /// `ν(ξ)`.
    pub fn at(&self, xi: T) -> T {
        self.nu0 + self.nu1 * xi
    }
}

/// Chaos coefficients `u_{kr}` stored as one [`FourierField`] per
/// Legendre order `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChaosState<T> {
    slices: Vec<FourierField<T>>,
}

impl<T: Real> ChaosState<T> {
    /// Zero state with `n` Fourier modes and `m` Legendre orders.
    pub fn zeros(n: usize, m: usize) -> Self {
        assert!(m >= 1);
        Self {
            slices: vec![FourierField::zeros(n); m],
        }
    }

    /// State for a deterministic initial condition: slice `r = 0` holds
    /// `ic` and the unresolved slices are zero. Rejects non-real fields.
    pub fn make_initial(ic: &FourierField<T>, m: usize) -> Result<Self> {
        let tol = FourierField::<T>::realness_tolerance();
        if !ic.is_real_valued(tol) {
            return Err(Error::NotRealValued {
                context: "chaos initial condition",
                defect: ic.hermitian_defect().to_f64().unwrap_or(f64::NAN),
            });
        }
        let mut state = Self::zeros(ic.mode_count(), m);
        state.slices[0] = ic.clone();
        Ok(state)
    }

    /// Fourier mode count `N`.
    pub fn mode_count(&self) -> usize {
        self.slices[0].mode_count()
    }

    /// Legendre order count `M`.
    pub fn polynomial_count(&self) -> usize {
        self.slices.len()
    }

    /// Legendre slice `r` as a Fourier field.
    pub fn slice(&self, r: usize) -> &FourierField<T> {
        &self.slices[r]
    }

    /// Mutable Legendre slice `r`.
    pub fn slice_mut(&mut self, r: usize) -> &mut FourierField<T> {
        &mut self.slices[r]
    }

    /// `u_{kr}`.
    pub fn get(&self, k: i64, r: usize) -> Complex<T> {
        self.slices[r].get(k)
    }

    /// Zeroes the unpaired mode `k = -N/2` in every slice.
    pub fn zero_unpaired_mode(&mut self) {
        for slice in &mut self.slices {
            slice.zero_unpaired_mode();
        }
    }
}

impl<T: Real> OdeState for ChaosState<T> {
    type Scalar = T;

    fn scaled_add(&mut self, a: T, other: &Self) {
        debug_assert_eq!(self.slices.len(), other.slices.len());
        for (s, o) in self.slices.iter_mut().zip(&other.slices) {
            s.scaled_add(a, o);
        }
    }

    fn all_finite(&self) -> bool {
        self.slices.iter().all(|s| s.all_finite())
    }
}

/// Right-hand side of the full Galerkin system. Uses the tensor's
/// nonzero mask to skip structural zeros.
pub fn full_rhs<T: Real>(
    state: &ChaosState<T>,
    nu: &ViscosityExpansion<T>,
    tensor: &TripleTensor<T>,
) -> Result<ChaosState<T>> {
    full_rhs_impl(state, nu, tensor, true)
}

/// Reference evaluation without the sparsity shortcut; kept public so
/// tests can confirm the mask changes no result.
pub fn full_rhs_dense<T: Real>(
    state: &ChaosState<T>,
    nu: &ViscosityExpansion<T>,
    tensor: &TripleTensor<T>,
) -> Result<ChaosState<T>> {
    full_rhs_impl(state, nu, tensor, false)
}

fn full_rhs_impl<T: Real>(
    state: &ChaosState<T>,
    nu: &ViscosityExpansion<T>,
    tensor: &TripleTensor<T>,
    use_mask: bool,
) -> Result<ChaosState<T>> {
    let m = state.polynomial_count();
    if tensor.polynomial_count() != m {
        return Err(Error::DimensionMismatch {
            context: "chaos state vs triple tensor",
            left: m,
            right: tensor.polynomial_count(),
        });
    }
    let n = state.mode_count();

    // Pairwise convolutions; conv(l, m) is symmetric in (l, m).
    let mut convs: Vec<Option<FourierField<T>>> = vec![None; m * m];
    for l in 0..m {
        for mm in l..m {
            let needed = (0..m).any(|r| !use_mask || tensor.is_nonzero(l, mm, r));
            if needed {
                let conv = state.slice(l).convolve(state.slice(mm))?;
                convs[l * m + mm] = Some(conv);
            }
        }
    }
    let conv_at = |l: usize, mm: usize| -> &FourierField<T> {
        let (a, b) = if l <= mm { (l, mm) } else { (mm, l) };
        convs[a * m + b].as_ref().expect("convolution precomputed")
    };

    let half = cast::<T>(0.5);
    let mut out = ChaosState::zeros(n, m);
    for r in 0..m {
        let out_slice = out.slice_mut(r);
        // Quadratic part: -(ik/2) Σ_{l,m} c_{lmr} conv(u_l, u_m)_k.
        for l in 0..m {
            for mm in 0..m {
                if use_mask && !tensor.is_nonzero(l, mm, r) {
                    continue;
                }
                let coef = tensor.get(l, mm, r);
                let conv = conv_at(l, mm);
                for k in out_slice.min_wavenumber()..=out_slice.max_wavenumber() {
                    let k_t = cast_i64::<T>(k);
                    let c = conv.get(k) * coef;
                    // Multiply by -(ik/2).
                    let term = Complex::new(c.im * k_t * half, -c.re * k_t * half);
                    out_slice.set(k, out_slice.get(k) + term);
                }
            }
        }
        // Viscous part: -k² Σ_{l∈{0,1}} Σ_m ν_l u_{km} c_{lmr}.
        for mm in 0..m {
            let coef = nu.nu0() * tensor.get(0, mm, r) + nu.nu1() * tensor.get(1, mm, r);
            if use_mask && !tensor.is_nonzero(0, mm, r) && !tensor.is_nonzero(1, mm, r) {
                continue;
            }
            let slice = state.slice(mm);
            for k in out_slice.min_wavenumber()..=out_slice.max_wavenumber() {
                let k_t = cast_i64::<T>(k);
                let term = slice.get(k) * (coef * k_t * k_t);
                out_slice.set(k, out_slice.get(k) - term);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::burgers_rhs;
    use crate::timestep::integrate_with;

    type C = Complex<f64>;

    fn c(re: f64, im: f64) -> C {
        Complex::new(re, im)
    }

    /// Brute-force evaluator looping over every (l, m, p, q) without
    /// sparsity shortcuts.
    fn full_rhs_brute(
        state: &ChaosState<f64>,
        nu: &ViscosityExpansion<f64>,
        tensor: &TripleTensor<f64>,
    ) -> ChaosState<f64> {
        let m = state.polynomial_count();
        let n = state.mode_count();
        let mut out = ChaosState::zeros(n, m);
        let k_lo = -((n / 2) as i64);
        let k_hi = (n / 2) as i64 - 1;
        for r in 0..m {
            for k in k_lo..=k_hi {
                let mut quad = c(0.0, 0.0);
                for l in 0..m {
                    for mm in 0..m {
                        for p in k_lo..=k_hi {
                            let q = k - p;
                            if q < k_lo || q > k_hi {
                                continue;
                            }
                            quad += state.get(p, l) * state.get(q, mm) * tensor.get(l, mm, r);
                        }
                    }
                }
                let kf = k as f64;
                let mut value = c(0.0, -kf / 2.0) * quad;
                for l in 0..2usize {
                    let nul = if l == 0 { nu.nu0() } else { nu.nu1() };
                    for mm in 0..m {
                        value -= state.get(k, mm) * (nul * kf * kf * tensor.get(l, mm, r));
                    }
                }
                out.slice_mut(r).set(k, value);
            }
        }
        out
    }

    fn random_state(n: usize, m: usize, seed: u64) -> ChaosState<f64> {
        // Small deterministic LCG keeps the oracle self-contained.
        let mut x = seed;
        let mut next = || {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((x >> 33) as f64) / (u32::MAX as f64) - 0.5
        };
        let mut state = ChaosState::zeros(n, m);
        for r in 0..m {
            for k in -((n / 2) as i64)..(n / 2) as i64 {
                state.slice_mut(r).set(k, c(next(), next()));
            }
        }
        state
    }

    #[test]
    fn viscosity_validation() {
        assert!(ViscosityExpansion::<f64>::new(0.1, 0.07).is_ok());
        assert!(ViscosityExpansion::<f64>::new(0.1, 0.1).is_err());
        assert!(ViscosityExpansion::<f64>::new(0.1, -0.2).is_err());
        let nu = ViscosityExpansion::<f64>::new(0.1, 0.07).unwrap();
        assert!((nu.at(1.0) - 0.17).abs() < 1e-15);
        assert!((nu.at(-1.0) - 0.03).abs() < 1e-15);
    }

    #[test]
    fn make_initial_populates_slice_zero_only() {
        let sine = FourierField::<f64>::sine(16);
        let state = ChaosState::make_initial(&sine, 7).unwrap();
        assert_eq!(state.get(1, 0), c(0.0, -0.5));
        assert_eq!(state.get(-1, 0), c(0.0, 0.5));
        for r in 1..7 {
            assert!(state.slice(r).iter().all(|(_, v)| v == c(0.0, 0.0)));
        }

        let zero = FourierField::<f64>::zeros(16);
        let z = ChaosState::make_initial(&zero, 3).unwrap();
        assert!(z.all_finite());
        assert!((0..3).all(|r| z.slice(r).iter().all(|(_, v)| v == c(0.0, 0.0))));
    }

    #[test]
    fn make_initial_rejects_unpaired_mode() {
        let mut ic = FourierField::<f64>::zeros(16);
        ic.set(-8, c(0.1, 0.0));
        assert!(matches!(
            ChaosState::make_initial(&ic, 3),
            Err(Error::NotRealValued { .. })
        ));
    }

    #[test]
    fn full_rhs_collapses_to_deterministic_for_certain_viscosity() {
        let nu = ViscosityExpansion::new(0.1, 0.0).unwrap();
        let tensor = TripleTensor::with_default_rule(5);
        let sine = FourierField::<f64>::sine(16);
        let state = ChaosState::make_initial(&sine, 5).unwrap();
        let d = full_rhs(&state, &nu, &tensor).unwrap();
        let expected = burgers_rhs(&sine, 0.1);
        for r in 1..5 {
            assert!(d.slice(r).iter().all(|(_, v)| v.norm() == 0.0));
        }
        for (k, v) in d.slice(0).iter() {
            assert!((v - expected.get(k)).norm() < 1e-15, "mode {k}");
        }
    }

    #[test]
    fn full_rhs_single_mode_uncertainty_coupling() {
        // u_{1,0} = a only: the viscous sum leaves l = 1, m = 0, so
        // d_{1,1} = -1² ν₁ a c_{101} = -ν₁ a. Cross-checked against the
        // projection E[(ν₀ + ν₁ξ) a L₀ L₁]/E[L₁²] = ν₁ a.
        let nu = ViscosityExpansion::new(0.1, 0.07).unwrap();
        let tensor = TripleTensor::with_default_rule(3);
        let a = c(0.4, -0.1);
        let mut state = ChaosState::zeros(8, 3);
        state.slice_mut(0).set(1, a);
        let d = full_rhs(&state, &nu, &tensor).unwrap();
        let expected = -a * 0.07;
        assert!((d.get(1, 1) - expected).norm() < 1e-16);
        // No r = 2 coupling from a single (l, m) = (0, 0) or (1, 0) source.
        assert!(d.slice(2).iter().all(|(_, v)| v.norm() < 1e-16));
    }

    #[test]
    fn full_rhs_matches_brute_force() {
        let nu = ViscosityExpansion::new(0.12, 0.05).unwrap();
        let tensor = TripleTensor::with_default_rule(3);
        let state = random_state(8, 3, 7);
        let fast = full_rhs(&state, &nu, &tensor).unwrap();
        let brute = full_rhs_brute(&state, &nu, &tensor);
        for r in 0..3 {
            for (k, v) in fast.slice(r).iter() {
                assert!(
                    (v - brute.get(k, r)).norm() < 1e-12,
                    "r = {r}, k = {k}: {v:?} vs {:?}",
                    brute.get(k, r)
                );
            }
        }
    }

    #[test]
    fn full_rhs_mask_changes_nothing() {
        let nu = ViscosityExpansion::new(0.1, 0.07).unwrap();
        let tensor = TripleTensor::with_default_rule(4);
        let state = random_state(8, 4, 99);
        let masked = full_rhs(&state, &nu, &tensor).unwrap();
        let dense = full_rhs_dense(&state, &nu, &tensor).unwrap();
        for r in 0..4 {
            for (k, v) in masked.slice(r).iter() {
                assert!((v - dense.get(k, r)).norm() <= 1e-15, "r = {r}, k = {k}");
            }
        }
    }

    #[test]
    fn full_rhs_rejects_mismatched_tensor() {
        let nu = ViscosityExpansion::new(0.1, 0.07).unwrap();
        let tensor = TripleTensor::with_default_rule(4);
        let state = ChaosState::zeros(8, 3);
        assert!(matches!(
            full_rhs(&state, &nu, &tensor),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn degenerate_trajectory_matches_deterministic_burgers() {
        // ν₁ = 0: slice 0 under the full system equals the deterministic
        // trajectory at every step; slices r >= 1 stay identically zero.
        let n = 32;
        let m = 4;
        let nu = ViscosityExpansion::new(0.1, 0.0).unwrap();
        let tensor = TripleTensor::with_default_rule(m);
        let ic = FourierField::<f64>::sine(n);

        let full = integrate_with(
            ChaosState::make_initial(&ic, m).unwrap(),
            &|_t, s: &ChaosState<f64>| full_rhs(s, &nu, &tensor).unwrap(),
            0.001,
            0.1,
            1,
            |s: &mut ChaosState<f64>| s.zero_unpaired_mode(),
        )
        .unwrap();
        let det = integrate_with(
            ic,
            &|_t, u: &FourierField<f64>| burgers_rhs(u, 0.1),
            0.001,
            0.1,
            1,
            |u: &mut FourierField<f64>| u.zero_unpaired_mode(),
        )
        .unwrap();

        for (full_state, det_state) in full.states.iter().zip(&det.states) {
            for r in 1..m {
                assert!(full_state.slice(r).iter().all(|(_, v)| v.norm() == 0.0));
            }
            for (k, v) in full_state.slice(0).iter() {
                assert!((v - det_state.get(k)).norm() < 1e-12, "mode {k}");
            }
        }
    }
}
