//! Reduced models for the mean chaos coefficients: projection,
//! Markovian term, closed-form memory kernels, and the finite-memory
//! ODE hierarchy with trapezoidal closure.
//!
//! Only the first Legendre coefficient is resolved (`Λ = 1`). The
//! projection replaces every unresolved coefficient by zero, so the
//! first two memory kernels evaluate in closed form on the resolved
//! field. Writing `P₁ = PLu` for the projected right-hand side, the
//! unresolved components collapse to
//!
//! `PLu_{0p1} = -p² ν₁ c₁₀₁ û_p` (zero for higher orders),
//!
//! and the kernels feeding the hierarchy become
//!
//! `PLQLu_{0k0} = -ik c₁₀₀ conv(PLu₁, û)_k
//!               - k² (ν₀ c₀₁₀ + ν₁ c₁₁₀) PLu_{0k1}`,
//! `PLQLQLu_{0k0}` analogously with one more application of `QL`.
//!
//! The structurally zero tensor entries (`c₁₀₀`, `c₀₁₀`, ...) are looked
//! up rather than folded away, so the code mirrors the projected
//! operator expressions for any valid tensor.
//!
//! The memory term `w_{jk}(t)` over a window of length `t_j` split into
//! `n_j` subintervals evolves by
//!
//! `dw⁽ⁱ⁾_j/dt = -(2/Δt_j) w⁽ⁱ⁾_j + (-1)^{i+1} 2 K_{j+1}(û)
//!              + Σ_{l<i} (4/Δt_j)(-1)^{i+l+1} w⁽ˡ⁾_j + w⁽ⁱ⁾_{j+1}`,
//!
//! closed by `w_{n} ≡ 0`, with the resolved equation
//! `dû/dt = markovian(û) + Σ_i w⁽ⁱ⁾_0`.

use num_complex::Complex;

use crate::basis::TripleTensor;
use crate::chaos::ViscosityExpansion;
use crate::error::{Error, Result};
use crate::field::FourierField;
use crate::scalar::{cast, cast_i64, Real};
use crate::timestep::OdeState;

/// Markovian term of the reduced model: the full right-hand side
/// restricted to the resolved coefficient,
/// `out_k = -(ik/2) c₀₀₀ Σ_{p+q=k} û_p û_q - k² (ν₀ c₀₀₀ + ν₁ c₁₀₀) û_k`.
pub fn markovian<T: Real>(
    u: &FourierField<T>,
    nu: &ViscosityExpansion<T>,
    tensor: &TripleTensor<T>,
) -> FourierField<T> {
    let m = tensor.polynomial_count();
    let c000 = tensor.get(0, 0, 0);
    let visc = nu.nu0() * c000
        + if m >= 2 {
            nu.nu1() * tensor.get(1, 0, 0)
        } else {
            T::zero()
        };
    let conv = u.convolve(u).expect("same field on both sides");
    let half = cast::<T>(0.5);
    let mut out = FourierField::zeros(u.mode_count());
    for (k, amp) in u.iter() {
        let k_t = cast_i64::<T>(k);
        let c = conv.get(k) * c000;
        let nonlinear = Complex::new(c.im * k_t * half, -c.re * k_t * half);
        out.set(k, nonlinear - amp * (visc * k_t * k_t));
    }
    out
}

/// Right-hand side of the memoryless reduced model (`dû/dt` keeps only
/// the Markovian term).
pub fn markovian_only_rhs<T: Real>(
    u: &FourierField<T>,
    nu: &ViscosityExpansion<T>,
    tensor: &TripleTensor<T>,
) -> FourierField<T> {
    markovian(u, nu, tensor)
}

/// Unresolved first-order component `PLu_{0p1} = -p² ν₁ c₁₀₁ û_p`.
fn plu_order_one<T: Real>(
    u: &FourierField<T>,
    nu: &ViscosityExpansion<T>,
    tensor: &TripleTensor<T>,
) -> FourierField<T> {
    let c101 = tensor.get(1, 0, 1);
    let mut out = FourierField::zeros(u.mode_count());
    for (p, amp) in u.iter() {
        let p_t = cast_i64::<T>(p);
        out.set(p, amp * (-nu.nu1() * c101 * p_t * p_t));
    }
    out
}

/// Unresolved second-order components `PLQLu_{0kr}` for `r ∈ {1, 2}`:
/// `-ik c_{10r} conv(PLu₁, û)_k - k² (ν₀ c_{01r} + ν₁ c_{11r}) PLu_{0k1}`.
fn plql_order<T: Real>(
    r: usize,
    u: &FourierField<T>,
    plu1: &FourierField<T>,
    conv_plu1_u: &FourierField<T>,
    nu: &ViscosityExpansion<T>,
    tensor: &TripleTensor<T>,
) -> FourierField<T> {
    let c10r = tensor.get(1, 0, r);
    let visc = nu.nu0() * tensor.get(0, 1, r) + nu.nu1() * tensor.get(1, 1, r);
    let mut out = FourierField::zeros(u.mode_count());
    for k in out.min_wavenumber()..=out.max_wavenumber() {
        let k_t = cast_i64::<T>(k);
        let mut val = -plu1.get(k) * (visc * k_t * k_t);
        if c10r != T::zero() {
            let c = conv_plu1_u.get(k) * c10r;
            // Multiply by -ik.
            val += Complex::new(c.im * k_t, -c.re * k_t);
        }
        out.set(k, val);
    }
    out
}

/// First memory kernel `PLQLu_{0k0}` evaluated at the resolved field.
///
/// On single-mode states this is the linear destabilizing term
/// `k⁴ ν₁² c₁₀₁ c₁₁₀ û_k`; it vanishes identically when `ν₁ = 0`.
pub fn kernel_plql<T: Real>(
    u: &FourierField<T>,
    nu: &ViscosityExpansion<T>,
    tensor: &TripleTensor<T>,
) -> FourierField<T> {
    let m = tensor.polynomial_count();
    let mut out = FourierField::zeros(u.mode_count());
    if m < 2 {
        return out; // no unresolved orders to couple through
    }
    let plu1 = plu_order_one(u, nu, tensor);
    // Quadratic part: -ik c₁₀₀ conv(PLu₁, û)_k. c₁₀₀ is a structural
    // zero of the Legendre tensor, so the convolution is skipped.
    let c100 = tensor.get(1, 0, 0);
    if c100 != T::zero() {
        let conv = plu1.convolve(u).expect("same mode count");
        for k in out.min_wavenumber()..=out.max_wavenumber() {
            let k_t = cast_i64::<T>(k);
            let c = conv.get(k) * c100;
            out.set(k, Complex::new(c.im * k_t, -c.re * k_t));
        }
    }
    // Viscous part: -k² (ν₀ c₀₁₀ + ν₁ c₁₁₀) PLu_{0k1}.
    let visc = nu.nu0() * tensor.get(0, 1, 0) + nu.nu1() * tensor.get(1, 1, 0);
    for k in out.min_wavenumber()..=out.max_wavenumber() {
        let k_t = cast_i64::<T>(k);
        out.set(k, out.get(k) - plu1.get(k) * (visc * k_t * k_t));
    }
    out
}

/// Second memory kernel `PLQLQLu_{0k0}` evaluated at the resolved field.
///
/// On single-mode states this is the linear stabilizing term
/// `-k⁶ ν₀ ν₁² c₀₁₁ c₁₀₁ c₁₁₀ û_k`; it vanishes identically when
/// `ν₁ = 0`.
pub fn kernel_plqlql<T: Real>(
    u: &FourierField<T>,
    nu: &ViscosityExpansion<T>,
    tensor: &TripleTensor<T>,
) -> FourierField<T> {
    let m = tensor.polynomial_count();
    let n = u.mode_count();
    let mut out = FourierField::zeros(n);
    if m < 2 {
        return out;
    }

    let plu1 = plu_order_one(u, nu, tensor);
    let conv_plu1_u = plu1.convolve(u).expect("same mode count");
    let plql: Vec<FourierField<T>> = (1..m.min(3))
        .map(|r| plql_order(r, u, &plu1, &conv_plu1_u, nu, tensor))
        .collect();

    // Part 1: -ik Σ_{l>=1} c_{l00} conv(PLQL_l, û)_k (structural zeros).
    for (l, plql_l) in plql.iter().enumerate().map(|(i, f)| (i + 1, f)) {
        let coef = tensor.get(l, 0, 0);
        if coef != T::zero() {
            let conv = plql_l.convolve(u).expect("same mode count");
            accumulate_minus_ik(&mut out, &conv, coef);
        }
    }

    // Part 2: -ik Σ_m c_{1m0} conv(PLu₁, PLu_m)_k with PLu₀ the full
    // Markovian term; only c₁₁₀ survives the sparsity rule.
    let c100 = tensor.get(1, 0, 0);
    if c100 != T::zero() {
        let conv = plu1
            .convolve(&markovian(u, nu, tensor))
            .expect("same mode count");
        accumulate_minus_ik(&mut out, &conv, c100);
    }
    let c110 = tensor.get(1, 1, 0);
    if c110 != T::zero() {
        let conv = plu1.convolve(&plu1).expect("same mode count");
        accumulate_minus_ik(&mut out, &conv, c110);
    }

    // Part 3: -k² Σ_{m ∈ {1,2}} (ν₀ c_{0m0} + ν₁ c_{1m0}) PLQL_m.
    for (mm, plql_m) in plql.iter().enumerate().map(|(i, f)| (i + 1, f)) {
        let coef = nu.nu0() * tensor.get(0, mm, 0) + nu.nu1() * tensor.get(1, mm, 0);
        if coef != T::zero() {
            for k in out.min_wavenumber()..=out.max_wavenumber() {
                let k_t = cast_i64::<T>(k);
                out.set(k, out.get(k) - plql_m.get(k) * (coef * k_t * k_t));
            }
        }
    }
    out
}

/// `out_k += -ik * coef * conv_k` (the `2 × (-ik/2)` prefactor).
fn accumulate_minus_ik<T: Real>(out: &mut FourierField<T>, conv: &FourierField<T>, coef: T) {
    for k in out.min_wavenumber()..=out.max_wavenumber() {
        let k_t = cast_i64::<T>(k);
        let c = conv.get(k) * coef;
        out.set(k, out.get(k) + Complex::new(c.im * k_t, -c.re * k_t));
    }
}

/// One level of the memory hierarchy: window length `t_len` split into
/// `subintervals` equal pieces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemoryLevel<T> {
    pub t_len: T,
    pub subintervals: usize,
}

impl<T: Real> MemoryLevel<T> {
    /// Subinterval width `Δt_j = t_j / n_j`.
    pub fn delta(&self) -> T {
        self.t_len / cast::<T>(self.subintervals as f64)
    }
}

/// Configuration of a reduced model with `n` hierarchy levels.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedConfig<T> {
    dim: usize,
    resolved_legendre: usize,
    levels: Vec<MemoryLevel<T>>,
}

impl<T: Real> ReducedConfig<T> {
    /// Validates the scope restrictions: `Λ = 1`, `n ∈ {1, 2}`, memory
    /// lengths non-increasing and positive, and all subinterval counts
    /// equal (the level coupling pairs subinterval `i` of level `j` with
    /// subinterval `i` of level `j + 1`).
    pub fn new(dim: usize, resolved_legendre: usize, levels: Vec<MemoryLevel<T>>) -> Result<Self> {
        if resolved_legendre != 1 {
            return Err(Error::InvalidReducedConfig(format!(
                "closed-form kernels require lambda = 1 (got {resolved_legendre})"
            )));
        }
        if levels.is_empty() || levels.len() > 2 {
            return Err(Error::InvalidReducedConfig(format!(
                "hierarchy depth must be 1 or 2 (got {})",
                levels.len()
            )));
        }
        for level in &levels {
            if level.t_len <= T::zero() || level.subintervals == 0 {
                return Err(Error::InvalidReducedConfig(
                    "memory lengths must be positive with at least one subinterval".into(),
                ));
            }
        }
        for pair in levels.windows(2) {
            if pair[1].t_len > pair[0].t_len {
                return Err(Error::InvalidReducedConfig(
                    "memory lengths must be non-increasing across levels".into(),
                ));
            }
            if pair[1].subintervals != pair[0].subintervals {
                return Err(Error::InvalidReducedConfig(
                    "all levels must use the same subinterval count".into(),
                ));
            }
        }
        Ok(Self {
            dim,
            resolved_legendre,
            levels,
        })
    }

    /// Resolved component count (Fourier modes for the Burgers model).
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Resolved Legendre count `Λ`.
    pub fn resolved_legendre(&self) -> usize {
        self.resolved_legendre
    }

    /// Hierarchy levels, outermost first.
    pub fn levels(&self) -> &[MemoryLevel<T>] {
        &self.levels
    }
}

/// Resolved coefficients plus the auxiliary memory variables
/// `w⁽ⁱ⁾_{jk}`; all memory variables start at zero because the memory
/// integrals vanish at `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedState<T> {
    resolved: Vec<Complex<T>>,
    w: Vec<Vec<Vec<Complex<T>>>>,
}

impl<T: Real> ReducedState<T> {
    /// State with the given resolved part and zero memory.
    pub fn new(resolved: Vec<Complex<T>>, cfg: &ReducedConfig<T>) -> Self {
        assert_eq!(resolved.len(), cfg.dim());
        let zero = vec![Complex::new(T::zero(), T::zero()); resolved.len()];
        let w = cfg
            .levels()
            .iter()
            .map(|level| vec![zero.clone(); level.subintervals])
            .collect();
        Self { resolved, w }
    }

    /// Resolved components.
    pub fn resolved(&self) -> &[Complex<T>] {
        &self.resolved
    }

    /// Mutable resolved components (e.g. for post-step projections).
    pub fn resolved_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.resolved
    }

    /// Memory variable `w⁽ⁱ⁾_j` (level `j`, subinterval index `i`,
    /// zero-based).
    pub fn memory(&self, level: usize, sub: usize) -> &[Complex<T>] {
        &self.w[level][sub]
    }

    /// Mutable access used by oracle setups that start the hierarchy
    /// from exact windowed integrals instead of zero.
    pub fn memory_mut(&mut self, level: usize, sub: usize) -> &mut [Complex<T>] {
        &mut self.w[level][sub]
    }

    /// Reconstructed level-`j` memory term `w_j = Σ_i w⁽ⁱ⁾_j`.
    pub fn memory_term(&self, level: usize) -> Vec<Complex<T>> {
        let mut total = vec![Complex::new(T::zero(), T::zero()); self.resolved.len()];
        for sub in &self.w[level] {
            for (t, v) in total.iter_mut().zip(sub) {
                *t += *v;
            }
        }
        total
    }

    /// Resolved part viewed as a Fourier field.
    pub fn resolved_field(&self) -> FourierField<T> {
        FourierField::from_amplitudes(self.resolved.clone())
    }
}

impl<T: Real> OdeState for ReducedState<T> {
    type Scalar = T;

    fn scaled_add(&mut self, a: T, other: &Self) {
        self.resolved.scaled_add(a, &other.resolved);
        for (levels, other_levels) in self.w.iter_mut().zip(&other.w) {
            for (sub, other_sub) in levels.iter_mut().zip(other_levels) {
                sub.scaled_add(a, other_sub);
            }
        }
    }

    fn all_finite(&self) -> bool {
        self.resolved.all_finite() && self.w.iter().flatten().all(|sub| sub.all_finite())
    }
}

/// Dynamics callbacks of a reduced model: the Markovian term and one
/// kernel evaluator per hierarchy level.
///
/// Every time-propagated factor `Pe^{tL} F(u₀)` is closed by evaluating
/// `F` at the current resolved state; kernel implementations that can
/// evaluate the propagated factor exactly (linear systems) receive the
/// current time instead.
pub trait ReducedOps<T: Real> {
    /// Resolved component count.
    fn dim(&self) -> usize;

    /// Number of kernel levels supplied.
    fn kernel_count(&self) -> usize;

    /// Markovian term at the resolved state.
    fn markovian(&self, resolved: &[Complex<T>], out: &mut [Complex<T>]);

    /// Level-`j` kernel `K_{j+1}` (`PL(QL)^j QLu` closed at the resolved
    /// state, or exactly in `t`).
    fn kernel(&self, level: usize, t: T, resolved: &[Complex<T>], out: &mut [Complex<T>]);
}

/// Reduced-model right-hand side: validates the kernel count against
/// the hierarchy depth, then evaluates the hierarchy equations.
pub fn memory_hierarchy_rhs<T: Real, O: ReducedOps<T>>(
    state: &ReducedState<T>,
    cfg: &ReducedConfig<T>,
    ops: &O,
    t: T,
) -> Result<ReducedState<T>> {
    if ops.kernel_count() != cfg.levels().len() {
        return Err(Error::InvalidReducedConfig(format!(
            "{} kernel evaluators supplied for {} hierarchy levels",
            ops.kernel_count(),
            cfg.levels().len()
        )));
    }
    if ops.dim() != cfg.dim() {
        return Err(Error::DimensionMismatch {
            context: "reduced ops vs config",
            left: ops.dim(),
            right: cfg.dim(),
        });
    }

    let dim = cfg.dim();
    let n_levels = cfg.levels().len();
    let zero = Complex::new(T::zero(), T::zero());
    let mut out = ReducedState::new(vec![zero; dim], cfg);

    // Resolved part: markovian + Σ_i w⁽ⁱ⁾_0.
    ops.markovian(&state.resolved, &mut out.resolved);
    let w0 = state.memory_term(0);
    for (r, w) in out.resolved.iter_mut().zip(&w0) {
        *r += *w;
    }

    let mut kernel = vec![zero; dim];
    for (j, level) in cfg.levels().iter().enumerate() {
        ops.kernel(j, t, &state.resolved, &mut kernel);
        let delta = level.delta();
        let two_over = cast::<T>(2.0) / delta;
        let four_over = cast::<T>(4.0) / delta;
        for i in 0..level.subintervals {
            let kernel_sign = if i % 2 == 0 { T::one() } else { -T::one() };
            let dw = &mut out.w[j][i];
            for (c, (w, k)) in dw.iter_mut().zip(state.w[j][i].iter().zip(&kernel)) {
                *c = *k * (cast::<T>(2.0) * kernel_sign) - *w * two_over;
            }
            // Couplings to earlier subintervals of the same level.
            for l in 0..i {
                let sign = if (i + l) % 2 == 1 { T::one() } else { -T::one() };
                for (c, w) in dw.iter_mut().zip(&state.w[j][l]) {
                    *c += *w * (four_over * sign);
                }
            }
            // Next-level feed; the closure drops w at level n.
            if j + 1 < n_levels {
                for (c, w) in dw.iter_mut().zip(&state.w[j + 1][i]) {
                    *c += *w;
                }
            }
        }
    }
    Ok(out)
}

/// Burgers reduced-model callbacks: Markovian term plus the first one
/// or two closed-form kernels.
#[derive(Debug, Clone)]
pub struct BurgersReducedOps<'a, T> {
    nu: ViscosityExpansion<T>,
    tensor: &'a TripleTensor<T>,
    n: usize,
    kernels: usize,
}

impl<'a, T: Real> BurgersReducedOps<'a, T> {
    /// `kernels` must be 1 (`PLQL` only) or 2 (`PLQL` and `PLQLQL`).
    pub fn new(
        n: usize,
        nu: ViscosityExpansion<T>,
        tensor: &'a TripleTensor<T>,
        kernels: usize,
    ) -> Result<Self> {
        if kernels == 0 || kernels > 2 {
            return Err(Error::InvalidReducedConfig(format!(
                "closed-form kernels exist for levels 1 and 2 only (got {kernels})"
            )));
        }
        Ok(Self {
            nu,
            tensor,
            n,
            kernels,
        })
    }
}

impl<T: Real> ReducedOps<T> for BurgersReducedOps<'_, T> {
    fn dim(&self) -> usize {
        self.n
    }

    fn kernel_count(&self) -> usize {
        self.kernels
    }

    fn markovian(&self, resolved: &[Complex<T>], out: &mut [Complex<T>]) {
        let field = FourierField::from_amplitudes(resolved.to_vec());
        let result = markovian(&field, &self.nu, self.tensor);
        out.copy_from_slice(result.amplitudes());
    }

    fn kernel(&self, level: usize, _t: T, resolved: &[Complex<T>], out: &mut [Complex<T>]) {
        let field = FourierField::from_amplitudes(resolved.to_vec());
        let result = match level {
            0 => kernel_plql(&field, &self.nu, self.tensor),
            1 => kernel_plqlql(&field, &self.nu, self.tensor),
            _ => unreachable!("kernel_count() caps the hierarchy depth"),
        };
        out.copy_from_slice(result.amplitudes());
    }
}
