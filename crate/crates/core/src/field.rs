//! Fourier-space fields on the periodic domain `[0, 2π]`.
//!
//! A field holds the complex amplitudes `u_k` for wavenumbers
//! `k ∈ F = [-N/2, N/2 - 1]`, representing
//! `u_N(x, t) = Σ_{k ∈ F} u_k(t) e^{ikx}`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{cast, cast_i64, Real};

/// Truncated Fourier representation of a periodic field.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierField<T> {
    n: usize,
    amps: Vec<Complex<T>>,
}

impl<T: Real> FourierField<T> {
    /// Zero field with `n` modes (`n` even, at least 2).
    pub fn zeros(n: usize) -> Self {
        assert!(n >= 2 && n % 2 == 0, "mode count must be even and >= 2");
        Self {
            n,
            amps: vec![Complex::new(T::zero(), T::zero()); n],
        }
    }

    /// Field from explicit `(k, amplitude)` pairs; unspecified modes are
    /// zero. Fails on wavenumbers outside `F`.
    pub fn from_modes(n: usize, modes: &[(i64, Complex<T>)]) -> Result<Self> {
        let mut field = Self::zeros(n);
        for &(k, amp) in modes {
            if k < field.min_wavenumber() || k > field.max_wavenumber() {
                return Err(Error::Precondition(format!(
                    "wavenumber {k} outside F = [{}, {}]",
                    field.min_wavenumber(),
                    field.max_wavenumber()
                )));
            }
            field.set(k, amp);
        }
        Ok(field)
    }

    /// Fourier coefficients of `sin x`: `u_1 = -i/2`, `u_{-1} = i/2`.
    pub fn sine(n: usize) -> Self {
        let half = cast::<T>(0.5);
        Self::from_modes(
            n,
            &[
                (1, Complex::new(T::zero(), -half)),
                (-1, Complex::new(T::zero(), half)),
            ],
        )
        .expect("|k| = 1 fits any even n >= 4")
    }

    /// Mode count `N`.
    pub fn mode_count(&self) -> usize {
        self.n
    }

    /// Smallest wavenumber in `F`: `-N/2`.
    pub fn min_wavenumber(&self) -> i64 {
        -((self.n / 2) as i64)
    }

    /// Largest wavenumber in `F`: `N/2 - 1`.
    pub fn max_wavenumber(&self) -> i64 {
        (self.n / 2) as i64 - 1
    }

    #[inline]
    fn index(&self, k: i64) -> usize {
        debug_assert!(k >= self.min_wavenumber() && k <= self.max_wavenumber());
        (k + (self.n / 2) as i64) as usize
    }

    /// Amplitude of mode `k`.
    #[inline]
    pub fn get(&self, k: i64) -> Complex<T> {
        self.amps[self.index(k)]
    }

    /// Sets the amplitude of mode `k`.
    #[inline]
    pub fn set(&mut self, k: i64, value: Complex<T>) {
        let idx = self.index(k);
        self.amps[idx] = value;
    }

    /// Iterates `(k, u_k)` in increasing `k`.
    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex<T>)> + '_ {
        let offset = (self.n / 2) as i64;
        self.amps
            .iter()
            .enumerate()
            .map(move |(i, &a)| (i as i64 - offset, a))
    }

    /// Raw amplitude storage, index `i` holding mode `k = i - N/2`.
    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amps
    }

    /// Builds a field from raw storage in the same layout.
    pub fn from_amplitudes(amps: Vec<Complex<T>>) -> Self {
        assert!(amps.len() >= 2 && amps.len() % 2 == 0);
        Self {
            n: amps.len(),
            amps,
        }
    }

    /// Truncated convolution `out_k = Σ_{p+q=k, p,q ∈ F} u_p v_q`,
    /// exactly as written: no padding, no dealiasing. Direct `O(N²)`
    /// double loop.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                context: "convolution operands",
                left: self.n,
                right: other.n,
            });
        }
        let n = self.n;
        let mut out = vec![Complex::new(T::zero(), T::zero()); n];
        // Storage indices satisfy a_p + a_q = a_out + N/2.
        for (a_out, slot) in out.iter_mut().enumerate() {
            let s = a_out + n / 2;
            let p_lo = s.saturating_sub(n - 1);
            let p_hi = s.min(n - 1);
            let mut acc = Complex::new(T::zero(), T::zero());
            for a_p in p_lo..=p_hi {
                acc += self.amps[a_p] * other.amps[s - a_p];
            }
            *slot = acc;
        }
        Ok(Self { n, amps: out })
    }

    /// Evaluates `Σ_k u_k e^{ikx}` at a physical point.
    pub fn eval_physical(&self, x: T) -> Complex<T> {
        let mut acc = Complex::new(T::zero(), T::zero());
        for (k, amp) in self.iter() {
            let phase = cast_i64::<T>(k) * x;
            acc += amp * Complex::new(phase.cos(), phase.sin());
        }
        acc
    }

    /// Largest violation of the real-valuedness conditions:
    /// `u_{-k} = conj(u_k)` for paired modes, `Im u_0 = 0`, and
    /// `u_{-N/2} = 0`.
    pub fn hermitian_defect(&self) -> T {
        let mut defect = self.get(0).im.abs();
        defect = defect.max(self.get(self.min_wavenumber()).norm_sqr().sqrt());
        for k in 1..=(self.max_wavenumber()) {
            let diff = self.get(-k) - self.get(k).conj();
            defect = defect.max(diff.norm_sqr().sqrt());
        }
        defect
    }

    /// Default tolerance for the real-valuedness check; well inside the
    /// 1e-10 budget for `f64`.
    pub fn realness_tolerance() -> T {
        T::epsilon() * cast::<T>(1e3)
    }

    /// True when the field passes [`Self::hermitian_defect`] at `tol`.
    pub fn is_real_valued(&self, tol: T) -> bool {
        self.hermitian_defect() <= tol
    }

    /// Zeroes the unpaired mode `k = -N/2`.
    pub fn zero_unpaired_mode(&mut self) {
        let k = self.min_wavenumber();
        self.set(k, Complex::new(T::zero(), T::zero()));
    }
}

/// Deterministic Burgers right-hand side in Fourier space:
/// `du_k/dt = -(ik/2) Σ_{p+q=k} u_p u_q - ν k² u_k`.
pub fn burgers_rhs<T: Real>(u: &FourierField<T>, nu: T) -> FourierField<T> {
    let conv = u.convolve(u).expect("same field on both sides");
    let mut out = FourierField::zeros(u.mode_count());
    let half = cast::<T>(0.5);
    for (k, amp) in u.iter() {
        let k_t = cast_i64::<T>(k);
        // -(ik/2) c_k: multiply by -i k/2.
        let c = conv.get(k);
        let nonlinear = Complex::new(c.im * k_t * half, -c.re * k_t * half);
        let viscous = amp * (nu * k_t * k_t);
        out.set(k, nonlinear - viscous);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    type C = Complex<f64>;

    fn c(re: f64, im: f64) -> C {
        Complex::new(re, im)
    }

    /// O(N^2) reference convolution over all (p, q) pairs.
    fn convolve_brute(u: &FourierField<f64>, v: &FourierField<f64>) -> FourierField<f64> {
        let mut out = FourierField::zeros(u.mode_count());
        for (p, up) in u.iter() {
            for (q, vq) in v.iter() {
                let k = p + q;
                if k >= out.min_wavenumber() && k <= out.max_wavenumber() {
                    out.set(k, out.get(k) + up * vq);
                }
            }
        }
        out
    }

    fn field_strategy(n: usize) -> impl Strategy<Value = FourierField<f64>> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n).prop_map(move |vals| {
            FourierField::from_amplitudes(vals.into_iter().map(|(re, im)| c(re, im)).collect())
        })
    }

    #[test]
    fn indexing_covers_f() {
        let field = FourierField::<f64>::zeros(8);
        assert_eq!(field.min_wavenumber(), -4);
        assert_eq!(field.max_wavenumber(), 3);
        let ks: Vec<i64> = field.iter().map(|(k, _)| k).collect();
        assert_eq!(ks, vec![-4, -3, -2, -1, 0, 1, 2, 3]);
    }

    #[test]
    fn convolve_single_modes() {
        let u = FourierField::from_modes(8, &[(1, c(2.0, 1.0))]).unwrap();
        let v = FourierField::from_modes(8, &[(1, c(-1.0, 3.0))]).unwrap();
        let conv = u.convolve(&v).unwrap();
        for (k, val) in conv.iter() {
            if k == 2 {
                assert_eq!(val, c(2.0, 1.0) * c(-1.0, 3.0));
            } else {
                assert_eq!(val, c(0.0, 0.0));
            }
        }
    }

    #[test]
    fn convolve_zero_annihilates() {
        let u = FourierField::from_modes(8, &[(1, c(1.0, 0.0)), (-2, c(0.5, 0.5))]).unwrap();
        let z = FourierField::zeros(8);
        let conv = u.convolve(&z).unwrap();
        assert!(conv.iter().all(|(_, v)| v == c(0.0, 0.0)));
    }

    #[test]
    fn convolve_rejects_mismatched_sizes() {
        let u = FourierField::<f64>::zeros(8);
        let v = FourierField::<f64>::zeros(16);
        assert!(matches!(
            u.convolve(&v),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn convolve_truncation_drops_out_of_range() {
        // p = q = 3 would land on k = 6, outside F for N = 8.
        let u = FourierField::from_modes(8, &[(3, c(1.0, 0.0))]).unwrap();
        let conv = u.convolve(&u).unwrap();
        assert!(conv.iter().all(|(_, v)| v == c(0.0, 0.0)));
    }

    proptest! {
        #[test]
        fn convolve_matches_brute_force(u in field_strategy(8), v in field_strategy(8)) {
            let fast = u.convolve(&v).unwrap();
            let brute = convolve_brute(&u, &v);
            for (a, b) in fast.amplitudes().iter().zip(brute.amplitudes()) {
                prop_assert!((a - b).norm() < 1e-12);
            }
        }

        #[test]
        fn convolve_commutes(u in field_strategy(8), v in field_strategy(8)) {
            let uv = u.convolve(&v).unwrap();
            let vu = v.convolve(&u).unwrap();
            for (a, b) in uv.amplitudes().iter().zip(vu.amplitudes()) {
                prop_assert!((a - b).norm() < 1e-13);
            }
        }

        #[test]
        fn convolve_is_bilinear(u in field_strategy(8), v in field_strategy(8), w in field_strategy(8)) {
            // conv(u, v + w) = conv(u, v) + conv(u, w)
            let mut vw = v.clone();
            for k in vw.min_wavenumber()..=vw.max_wavenumber() {
                vw.set(k, v.get(k) + w.get(k));
            }
            let lhs = u.convolve(&vw).unwrap();
            let rhs_a = u.convolve(&v).unwrap();
            let rhs_b = u.convolve(&w).unwrap();
            for k in lhs.min_wavenumber()..=lhs.max_wavenumber() {
                let diff = lhs.get(k) - (rhs_a.get(k) + rhs_b.get(k));
                prop_assert!(diff.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn burgers_rhs_single_mode() {
        // u = a δ_{k=1}: out_1 = -ν a, out_2 = -i a².
        let a = c(0.3, -0.2);
        let nu = 0.1;
        let u = FourierField::from_modes(16, &[(1, a)]).unwrap();
        let rhs = burgers_rhs(&u, nu);
        let minus_i = c(0.0, -1.0);
        for (k, val) in rhs.iter() {
            let expected = match k {
                1 => -a * nu,
                2 => minus_i * a * a,
                _ => c(0.0, 0.0),
            };
            assert!((val - expected).norm() < 1e-15, "mode {k}");
        }
    }

    #[test]
    fn burgers_rhs_zero_field() {
        let u = FourierField::<f64>::zeros(16);
        let rhs = burgers_rhs(&u, 0.2);
        assert!(rhs.iter().all(|(_, v)| v == c(0.0, 0.0)));
    }

    #[test]
    fn burgers_rhs_preserves_hermitian_symmetry() {
        // Real-valued field with zero unpaired mode at N = 16.
        let mut u = FourierField::<f64>::zeros(16);
        for (k, re, im) in [(1, 0.4, -0.3), (2, -0.1, 0.05), (5, 0.02, 0.3)] {
            u.set(k, c(re, im));
            u.set(-k, c(re, -im));
        }
        u.set(0, c(0.7, 0.0));
        assert!(u.is_real_valued(1e-12));
        let rhs = burgers_rhs(&u, 0.05);
        // Paired modes stay conjugate; the unpaired mode may pick up
        // truncation leakage and is excluded.
        for k in 1..=7 {
            let diff = rhs.get(-k) - rhs.get(k).conj();
            assert!(diff.norm() < 1e-12, "mode {k}: {diff:?}");
        }
        assert!(rhs.get(0).im.abs() < 1e-12);
    }

    #[test]
    fn eval_physical_cases() {
        let u = FourierField::from_modes(8, &[(0, c(2.5, 0.0))]).unwrap();
        assert!((u.eval_physical(1.234) - c(2.5, 0.0)).norm() < 1e-15);

        let sine = FourierField::<f64>::sine(8);
        let val = sine.eval_physical(std::f64::consts::FRAC_PI_2);
        assert!((val - c(1.0, 0.0)).norm() < 1e-15);

        let zero = FourierField::<f64>::zeros(8);
        assert_eq!(zero.eval_physical(0.3), c(0.0, 0.0));
    }

    #[test]
    fn realness_checks() {
        let mut u = FourierField::<f64>::zeros(8);
        u.set(1, c(0.5, 0.25));
        u.set(-1, c(0.5, -0.25));
        assert!(u.is_real_valued(1e-14));
        u.set(-4, c(1e-3, 0.0));
        assert!(!u.is_real_valued(1e-6));
        u.zero_unpaired_mode();
        assert!(u.is_real_valued(1e-14));
    }
}
