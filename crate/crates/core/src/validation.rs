//! Independent oracles for the solvers: a non-intrusive quadrature
//! reference and a Monte Carlo reference for the Galerkin moments, the
//! scalar linear-decay demo, and a matrix-exponential oracle for the
//! finite-memory hierarchy on small linear systems.
//!
//! For a linear system `du/dt = A u` with coordinate projection `P₀`
//! (and `Q₀ = I - P₀`), the operator expressions reduce to matrix
//! algebra:
//!
//! - Markovian term: `A P₀ u₀`,
//! - kernels: `PL(QL)^j QLu₀ = (A Q₀)^{j+1} A P₀ u₀`,
//! - memory integrand over the window `[t - t₀, t]`:
//!   `g(s) = A Q₀ e^{(t-s) A Q₀} A P₀ e^{s A} u₀`.
//!
//! The memory integral is evaluated by composite trapezoid quadrature of
//! `g` with matrix exponentials computed by scaling and squaring; this
//! oracle is verified independently (Richardson refinement and an
//! analytic cross-check) so it can certify the hierarchy.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::basis::{QuadratureRule, TripleTensor};
use crate::chaos::ViscosityExpansion;
use crate::error::{Error, Result};
use crate::field::{burgers_rhs, FourierField};
use crate::reduced::{
    memory_hierarchy_rhs, MemoryLevel, ReducedConfig, ReducedOps, ReducedState,
};
use crate::scalar::{cast, Real};
use crate::stats::{MomentSeries, TimeSeries};
use crate::timestep::{integrate_with, step_count, OdeState, Trajectory};

/// Trapezoid panels used for the exact memory integrals.
pub const MEMORY_QUADRATURE_PANELS: usize = 10_000;

// ---------------------------------------------------------------------
// Small dense complex matrices.
// ---------------------------------------------------------------------

/// Dense square complex matrix, row-major, sized for systems of
/// dimension at most eight.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix<T> {
    dim: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> SquareMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Complex::new(T::zero(), T::zero()); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, Complex::new(T::one(), T::zero()));
        }
        m
    }

    /// Builds from real row data.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Self {
        let dim = rows.len();
        let mut m = Self::zeros(dim);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), dim, "matrix rows must be square");
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, Complex::new(cast::<T>(v), T::zero()));
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex<T>) {
        self.data[i * self.dim + j] = v;
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let d = self.dim;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self.get(i, k);
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                for j in 0..d {
                    out.set(i, j, out.get(i, j) + a * other.get(k, j));
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| {
                (0..self.dim).fold(Complex::new(T::zero(), T::zero()), |acc, j| {
                    acc + self.get(i, j) * v[j]
                })
            })
            .collect()
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&c| c * s).collect(),
        }
    }

    fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| a + b)
                .collect(),
        }
    }

    /// Max row sum of absolute values (infinity norm).
    fn norm_inf(&self) -> T {
        (0..self.dim).fold(T::zero(), |acc, i| {
            let row = (0..self.dim).fold(T::zero(), |s, j| {
                let c = self.get(i, j);
                s + (c.re * c.re + c.im * c.im).sqrt()
            });
            acc.max(row)
        })
    }

    /// Matrix exponential by scaling and squaring of the Taylor series.
    /// The scaled block is summed to machine precision, keeping the
    /// oracle well below the 1e-12 budget for the matrices used here.
    pub fn expm(&self) -> Result<Self> {
        let norm = self.norm_inf();
        if !norm.is_finite() {
            return Err(Error::Precondition(
                "matrix exponential of a non-finite matrix".into(),
            ));
        }
        // Scale so the Taylor series converges fast: |B| <= 1/4.
        let quarter = cast::<T>(0.25);
        let mut squarings = 0u32;
        let mut scale = T::one();
        while norm * scale > quarter && squarings < 64 {
            scale = scale * cast::<T>(0.5);
            squarings += 1;
        }
        let b = self.scale(scale);

        let mut sum = Self::identity(self.dim);
        let mut term = Self::identity(self.dim);
        for n in 1..=40 {
            term = term.matmul(&b).scale(T::one() / cast::<T>(n as f64));
            sum = sum.add(&term);
            if term.norm_inf() <= T::epsilon() * cast::<T>(0.01) {
                break;
            }
        }
        let mut result = sum;
        for _ in 0..squarings {
            result = result.matmul(&result);
        }
        if !result.data.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
            return Err(Error::Precondition(
                "matrix exponential overflowed".into(),
            ));
        }
        Ok(result)
    }
}

// ---------------------------------------------------------------------
// Linear system specification and its reduced-model callbacks.
// ---------------------------------------------------------------------

/// Small linear system `du/dt = A u` with a coordinate projection onto
/// the resolved index set; the initial condition lies in the range of
/// the projection (unresolved part zero).
#[derive(Debug, Clone)]
pub struct LinearSystemSpec<T> {
    a: SquareMatrix<T>,
    resolved: Vec<usize>,
    u0: Vec<Complex<T>>,
}

impl<T: Real> LinearSystemSpec<T> {
    pub fn new(a: SquareMatrix<T>, resolved: &[usize], u0: Vec<Complex<T>>) -> Result<Self> {
        let dim = a.dim();
        if dim == 0 || dim > 8 {
            return Err(Error::Precondition(format!(
                "linear system dimension must be in [1, 8] (got {dim})"
            )));
        }
        if u0.len() != dim {
            return Err(Error::DimensionMismatch {
                context: "linear system initial condition",
                left: u0.len(),
                right: dim,
            });
        }
        let mut is_resolved = vec![false; dim];
        for &idx in resolved {
            if idx >= dim {
                return Err(Error::Precondition(format!(
                    "resolved index {idx} outside dimension {dim}"
                )));
            }
            is_resolved[idx] = true;
        }
        for (i, flag) in is_resolved.iter().enumerate() {
            if !flag && u0[i].norm_sqr() != T::zero() {
                return Err(Error::Precondition(format!(
                    "initial condition must lie in the range of P (u0[{i}] != 0)"
                )));
            }
        }
        let resolved: Vec<usize> = (0..dim).filter(|&i| is_resolved[i]).collect();
        Ok(Self { a, resolved, u0 })
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    pub fn resolved_indices(&self) -> &[usize] {
        &self.resolved
    }

    /// Coordinate projection `P₀` onto the resolved indices.
    fn p0(&self) -> SquareMatrix<T> {
        let mut p = SquareMatrix::zeros(self.dim());
        for &i in &self.resolved {
            p.set(i, i, Complex::new(T::one(), T::zero()));
        }
        p
    }

    /// `A Q₀` with `Q₀ = I - P₀`.
    fn a_q0(&self) -> SquareMatrix<T> {
        let d = self.dim();
        let p0 = self.p0();
        let mut q0 = SquareMatrix::identity(d);
        for i in 0..d {
            for j in 0..d {
                q0.set(i, j, q0.get(i, j) - p0.get(i, j));
            }
        }
        self.a.matmul(&q0)
    }

    /// Kernel matrix `(A Q₀)^{level+1} A P₀` for `PL(QL)^level QLu₀`.
    fn kernel_matrix(&self, level: usize) -> SquareMatrix<T> {
        let aq0 = self.a_q0();
        let mut m = aq0.clone();
        for _ in 0..level {
            m = m.matmul(&aq0);
        }
        m.matmul(&self.a).matmul(&self.p0())
    }

    fn restrict(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        self.resolved.iter().map(|&i| v[i]).collect()
    }

    fn lift(&self, resolved: &[Complex<T>]) -> Vec<Complex<T>> {
        let mut v = vec![Complex::new(T::zero(), T::zero()); self.dim()];
        for (&i, &val) in self.resolved.iter().zip(resolved) {
            v[i] = val;
        }
        v
    }

    /// Resolved part of the full solution `e^{tA} u₀`.
    pub fn resolved_full_solution(&self, t: T) -> Result<Vec<Complex<T>>> {
        let flow = self.a.scale(t).expm()?;
        Ok(self.restrict(&flow.matvec(&self.u0)))
    }

    /// `∫_a^b g(s; t) ds` by composite trapezoid with `panels` panels,
    /// restricted to the resolved indices. Matrix exponentials advance
    /// incrementally across the panel grid.
    pub fn windowed_integral(&self, t: T, a: T, b: T, panels: usize) -> Result<Vec<Complex<T>>> {
        assert!(panels >= 1);
        if b <= a {
            return Ok(vec![Complex::new(T::zero(), T::zero()); self.resolved.len()]);
        }
        let h = (b - a) / cast::<T>(panels as f64);
        let aq0 = self.a_q0();
        let a_p0 = self.a.matmul(&self.p0());

        // F_j = e^{(t - s_j) A Q₀}, stepped by e^{-h A Q₀};
        // v_j = e^{s_j A} u₀, stepped by e^{h A}.
        let mut f = aq0.scale(t - a).expm()?;
        let f_step = aq0.scale(-h).expm()?;
        let mut v = self.a.scale(a).expm()?.matvec(&self.u0);
        let v_step = self.a.scale(h).expm()?;

        let zero = Complex::new(T::zero(), T::zero());
        let mut acc = vec![zero; self.dim()];
        for j in 0..=panels {
            let g = aq0.matmul(&f).matvec(&a_p0.matvec(&v));
            let weight = if j == 0 || j == panels {
                cast::<T>(0.5)
            } else {
                T::one()
            };
            for (slot, val) in acc.iter_mut().zip(&g) {
                *slot += *val * (weight * h);
            }
            if j < panels {
                f = f.matmul(&f_step);
                v = v_step.matvec(&v);
            }
        }
        Ok(self.restrict(&acc))
    }

    /// Finite-memory integral `w₀(t)` over the window
    /// `[max(0, t - t₀), t]`, restricted to the resolved indices.
    pub fn memory_integral(&self, t: T, t0: T, panels: usize) -> Result<Vec<Complex<T>>> {
        let a = (t - t0).max(T::zero());
        self.windowed_integral(t, a, t, panels)
    }
}

/// Reduced-model callbacks for a linear system. Kernels are either
/// closed at the current resolved state (the generic closure used by
/// the Burgers model) or evaluated exactly along the full flow
/// (`Pe^{tL}PL(QL)^jQLu₀` is computable for linear systems), which
/// isolates the trapezoidal closure error for the oracle comparison.
#[derive(Debug, Clone)]
pub struct LinearReducedOps<'a, T> {
    spec: &'a LinearSystemSpec<T>,
    kernel_matrices: Vec<SquareMatrix<T>>,
    markov_matrix: SquareMatrix<T>,
    time_closed: bool,
}

impl<'a, T: Real> LinearReducedOps<'a, T> {
    pub fn new(spec: &'a LinearSystemSpec<T>, levels: usize, time_closed: bool) -> Self {
        Self {
            kernel_matrices: (0..levels).map(|j| spec.kernel_matrix(j)).collect(),
            markov_matrix: spec.a.matmul(&spec.p0()),
            spec,
            time_closed,
        }
    }
}

impl<T: Real> ReducedOps<T> for LinearReducedOps<'_, T> {
    fn dim(&self) -> usize {
        self.spec.resolved.len()
    }

    fn kernel_count(&self) -> usize {
        self.kernel_matrices.len()
    }

    fn markovian(&self, resolved: &[Complex<T>], out: &mut [Complex<T>]) {
        let full = self.markov_matrix.matvec(&self.spec.lift(resolved));
        out.copy_from_slice(&self.spec.restrict(&full));
    }

    fn kernel(&self, level: usize, t: T, resolved: &[Complex<T>], out: &mut [Complex<T>]) {
        let arg = if self.time_closed {
            let flow = self
                .spec
                .a
                .scale(t)
                .expm()
                .expect("kernel flow must stay finite");
            flow.matvec(&self.spec.u0)
        } else {
            self.spec.lift(resolved)
        };
        let full = self.kernel_matrices[level].matvec(&arg);
        out.copy_from_slice(&self.spec.restrict(&full));
    }
}

/// Comparison of the hierarchy solution against the exact finite-memory
/// integral.
#[derive(Debug, Clone)]
pub struct HierarchyComparison<T> {
    /// Comparison times (absolute, starting at `t0`).
    pub times: Vec<T>,
    /// `‖w_hierarchy(t) - w_exact(t)‖_∞` normalized by the largest
    /// `‖w_exact‖_∞` over the window.
    pub rel_deviation: Vec<T>,
    /// Maximum of `rel_deviation`.
    pub max_rel_deviation: T,
    /// Normalization scale `max_t ‖w_exact(t)‖_∞`.
    pub w_scale: T,
}

/// Compares the one-level hierarchy (`n = 1`, kernel `K₁` supplied
/// exactly as `PLQL` of the linear system) with the exact finite-memory
/// integral over `t ∈ [t0, t_end]`.
///
/// The hierarchy starts at `t0` from the exact windowed subinterval
/// integrals, so the reported deviation is the trapezoidal-closure
/// error `O(Δt₀²)` rather than the start-up transient of an empty
/// memory window.
pub fn hierarchy_oracle<T: Real>(
    spec: &LinearSystemSpec<T>,
    t0: T,
    n0: usize,
    ode_dt: T,
    t_end: T,
    stride: usize,
) -> Result<HierarchyComparison<T>> {
    if t_end <= t0 {
        return Err(Error::Precondition(
            "hierarchy oracle needs t_end > t0".into(),
        ));
    }
    let resolved_dim = spec.resolved_indices().len();
    let cfg = ReducedConfig::new(
        resolved_dim,
        1,
        vec![MemoryLevel {
            t_len: t0,
            subintervals: n0,
        }],
    )?;
    let ops = LinearReducedOps::new(spec, 1, true);

    // Exact state at t0: resolved part of the full flow plus the
    // windowed per-subinterval integrals.
    let mut state = ReducedState::new(spec.resolved_full_solution(t0)?, &cfg);
    let delta = t0 / cast::<T>(n0 as f64);
    let sub_panels = (MEMORY_QUADRATURE_PANELS / n0).max(1000);
    for i in 0..n0 {
        let b = t0 - delta * cast::<T>(i as f64);
        let a = t0 - delta * cast::<T>((i + 1) as f64);
        let w = spec.windowed_integral(t0, a, b, sub_panels)?;
        state.memory_mut(0, i).copy_from_slice(&w);
    }

    // Integrate the hierarchy; the inner clock runs from 0 = t0.
    let rhs = |tau: T, s: &ReducedState<T>| {
        memory_hierarchy_rhs(s, &cfg, &ops, tau + t0).expect("validated configuration")
    };
    let trajectory = integrate_with(state, &rhs, ode_dt, t_end - t0, stride, |_s| {})?;
    if let Some(step) = trajectory.blow_up {
        return Err(Error::BlowUp {
            step,
            time: (t0 + ode_dt * cast::<T>(step as f64))
                .to_f64()
                .unwrap_or(f64::NAN),
        });
    }

    let mut times = Vec::with_capacity(trajectory.states.len());
    let mut abs_dev = Vec::with_capacity(trajectory.states.len());
    let mut w_scale = T::zero();
    for (tau, s) in trajectory.times.iter().zip(&trajectory.states) {
        let t = *tau + t0;
        let exact = spec.memory_integral(t, t0, MEMORY_QUADRATURE_PANELS)?;
        let total = s.memory_term(0);
        let mut dev = T::zero();
        for (h, e) in total.iter().zip(&exact) {
            dev = dev.max((h - e).norm_sqr().sqrt());
            w_scale = w_scale.max(e.norm_sqr().sqrt());
        }
        times.push(t);
        abs_dev.push(dev);
    }
    let scale = if w_scale > T::zero() { w_scale } else { T::one() };
    let rel_deviation: Vec<T> = abs_dev.iter().map(|&d| d / scale).collect();
    let max_rel_deviation = rel_deviation
        .iter()
        .fold(T::zero(), |acc, &d| acc.max(d));
    Ok(HierarchyComparison {
        times,
        rel_deviation,
        max_rel_deviation,
        w_scale,
    })
}

// ---------------------------------------------------------------------
// Non-intrusive references for the Burgers moments.
// ---------------------------------------------------------------------

fn burgers_solve<T: Real>(
    ic: &FourierField<T>,
    nu: T,
    dt: T,
    t_end: T,
    stride: usize,
    zero_unpaired: bool,
) -> Result<Trajectory<FourierField<T>>> {
    let rhs = |_t: T, u: &FourierField<T>| burgers_rhs(u, nu);
    let trajectory = integrate_with(ic.clone(), &rhs, dt, t_end, stride, |u: &mut FourierField<T>| {
        if zero_unpaired {
            u.zero_unpaired_mode();
        }
    })?;
    if let Some(step) = trajectory.blow_up {
        return Err(Error::BlowUp {
            step,
            time: (dt * cast::<T>(step as f64)).to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(trajectory)
}

/// Output of [`quadrature_reference`].
#[derive(Debug, Clone)]
pub struct QuadratureReference<T> {
    /// `E(t)` and `G(t)` of the mean field.
    pub moments: MomentSeries<T>,
    /// Mean field `E[u_k(t)]` at each snapshot.
    pub mean_fields: Vec<FourierField<T>>,
    /// Per-mode variance `E[|u_k|²] - |E[u_k]|²` at the final time,
    /// indexed like the field storage.
    pub final_variance: Vec<T>,
}

/// Ground-truth moments by deterministic solves at Gauss-Legendre nodes
/// in `ξ`: `E[u_k(t)] = Σ_q (w_q / 2) u_k(t; ξ_q)`.
pub fn quadrature_reference<T: Real>(
    ic: &FourierField<T>,
    nu: &ViscosityExpansion<T>,
    nodes: usize,
    dt: T,
    t_end: T,
    stride: usize,
    zero_unpaired: bool,
) -> Result<QuadratureReference<T>> {
    if nodes < 2 {
        return Err(Error::Precondition(
            "quadrature reference needs at least 2 nodes".into(),
        ));
    }
    let rule = QuadratureRule::gauss_legendre(nodes);
    for &xi in rule.nodes() {
        let nu_q = nu.at(xi);
        if nu_q <= T::zero() {
            return Err(Error::NonPositiveNodeViscosity {
                xi: xi.to_f64().unwrap_or(f64::NAN),
                nu: nu_q.to_f64().unwrap_or(f64::NAN),
            });
        }
    }

    let n = ic.mode_count();
    let snapshots = step_count(dt, t_end)? / stride + 1;
    let mut mean_fields = vec![FourierField::<T>::zeros(n); snapshots];
    let mut second_moment = vec![T::zero(); n];
    let mut times = Vec::new();

    let half = cast::<T>(0.5);
    for (q, &xi) in rule.nodes().iter().enumerate() {
        let weight = rule.weights()[q] * half;
        let trajectory = burgers_solve(ic, nu.at(xi), dt, t_end, stride, zero_unpaired)?;
        if q == 0 {
            times = trajectory.times.clone();
        }
        for (mean, state) in mean_fields.iter_mut().zip(&trajectory.states) {
            mean.scaled_add(weight, state);
        }
        for (slot, amp) in second_moment.iter_mut().zip(trajectory.last().amplitudes()) {
            *slot += weight * amp.norm_sqr();
        }
    }

    let final_variance: Vec<T> = second_moment
        .iter()
        .zip(mean_fields.last().expect("at least one snapshot").amplitudes())
        .map(|(&m2, mean)| m2 - mean.norm_sqr())
        .collect();
    Ok(QuadratureReference {
        moments: MomentSeries::from_fields(times, &mean_fields),
        mean_fields,
        final_variance,
    })
}

/// Output of [`mc_reference`].
#[derive(Debug, Clone)]
pub struct McReference<T> {
    /// Sample-mean `E(t)` and `G(t)`.
    pub moments: MomentSeries<T>,
    /// The sampled viscosities, in draw order.
    pub nus: Vec<T>,
}

/// Monte Carlo reference: `samples` uniform draws `ξ ~ U[-1, 1]` from a
/// seeded ChaCha generator, solved deterministically in a fixed order,
/// so the output is reproducible bit for bit.
pub fn mc_reference<T: Real>(
    ic: &FourierField<T>,
    nu: &ViscosityExpansion<T>,
    samples: usize,
    seed: u64,
    dt: T,
    t_end: T,
    stride: usize,
    zero_unpaired: bool,
) -> Result<McReference<T>> {
    if samples == 0 {
        return Err(Error::Precondition("needs samples >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = ic.mode_count();
    let snapshots = step_count(dt, t_end)? / stride + 1;
    let mut mean_fields = vec![FourierField::<T>::zeros(n); snapshots];
    let mut times = Vec::new();
    let mut nus = Vec::with_capacity(samples);
    let weight = T::one() / cast::<T>(samples as f64);

    for s in 0..samples {
        let xi = cast::<T>(rng.gen_range(-1.0..=1.0));
        let nu_s = nu.at(xi);
        nus.push(nu_s);
        let trajectory = burgers_solve(ic, nu_s, dt, t_end, stride, zero_unpaired)?;
        if s == 0 {
            times = trajectory.times.clone();
        }
        for (mean, state) in mean_fields.iter_mut().zip(&trajectory.states) {
            mean.scaled_add(weight, state);
        }
    }
    Ok(McReference {
        moments: MomentSeries::from_fields(times, &mean_fields),
        nus,
    })
}

// ---------------------------------------------------------------------
// Linear decay demo: du/dt = -κ u with κ ~ U[0, 1].
// ---------------------------------------------------------------------

/// Output of [`linear_decay_gpc`]: the gPC mean and variance of the
/// scalar decay problem.
#[derive(Debug, Clone)]
pub struct LinearDecaySeries<T> {
    pub mean: TimeSeries<T>,
    pub variance: TimeSeries<T>,
}

/// Galerkin system for `du/dt = -κ u`, `κ ~ U[0, 1]`: with
/// `κ = (1 + ξ)/2` the expansion coefficients obey
/// `du_r/dt = -Σ_{l∈{0,1}} Σ_m κ_l u_m c_{lmr}`, `κ₀ = κ₁ = 1/2`.
/// The mean is the `u₀` coefficient; exact value
/// `E[e^{-κt}] = (1 - e^{-t})/t`.
pub fn linear_decay_gpc<T: Real>(
    u0: T,
    m: usize,
    dt: T,
    t_end: T,
    stride: usize,
) -> Result<LinearDecaySeries<T>> {
    if m < 2 {
        return Err(Error::Precondition(
            "linear decay demo needs M >= 2".into(),
        ));
    }
    let tensor = TripleTensor::<T>::with_default_rule(m);
    let half = cast::<T>(0.5);
    let rhs = move |_t: T, u: &Vec<Complex<T>>| -> Vec<Complex<T>> {
        (0..m)
            .map(|r| {
                let mut acc = Complex::new(T::zero(), T::zero());
                for l in 0..2 {
                    for mm in 0..m {
                        let coef = tensor.get(l, mm, r);
                        if coef != T::zero() {
                            acc -= u[mm] * (half * coef);
                        }
                    }
                }
                acc
            })
            .collect()
    };

    let mut state0 = vec![Complex::new(T::zero(), T::zero()); m];
    state0[0] = Complex::new(u0, T::zero());
    let trajectory = integrate_with(state0, &rhs, dt, t_end, stride, |_s| {})?;
    if let Some(step) = trajectory.blow_up {
        return Err(Error::BlowUp {
            step,
            time: (dt * cast::<T>(step as f64)).to_f64().unwrap_or(f64::NAN),
        });
    }

    let times = trajectory.times.clone();
    let mean: Vec<T> = trajectory.states.iter().map(|s| s[0].re).collect();
    let variance: Vec<T> = trajectory
        .states
        .iter()
        .map(|s| {
            (1..m).fold(T::zero(), |acc, r| {
                acc + s[r].norm_sqr() / cast::<T>((2 * r + 1) as f64)
            })
        })
        .collect();
    Ok(LinearDecaySeries {
        mean: TimeSeries::new(times.clone(), mean),
        variance: TimeSeries::new(times, variance),
    })
}

/// Exact mean of the linear decay demo: `u0 (1 - e^{-t}) / t`.
pub fn linear_decay_exact_mean<T: Real>(u0: T, t: T) -> T {
    if t == T::zero() {
        return u0;
    }
    u0 * (T::one() - (-t).exp()) / t
}

#[cfg(test)]
mod tests {
    use super::*;

    type C = Complex<f64>;

    fn c(re: f64, im: f64) -> C {
        Complex::new(re, im)
    }

    /// 2x2 system with one resolved coordinate and zero
    /// unresolved-unresolved coupling, so the one-level closure is exact
    /// and only the trapezoidal error remains.
    fn test_system() -> LinearSystemSpec<f64> {
        let a = SquareMatrix::from_real_rows(&[vec![-1.0, 0.5], vec![-0.3, 0.0]]);
        LinearSystemSpec::new(a, &[0], vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap()
    }

    #[test]
    fn expm_diagonal() {
        let mut m = SquareMatrix::<f64>::zeros(3);
        m.set(0, 0, c(0.3, 0.0));
        m.set(1, 1, c(-1.7, 0.0));
        m.set(2, 2, c(0.0, 2.0));
        let e = m.expm().unwrap();
        assert!((e.get(0, 0).re - 0.3f64.exp()).abs() < 1e-14);
        assert!((e.get(1, 1).re - (-1.7f64).exp()).abs() < 1e-14);
        let expected = c(2.0f64.cos(), 2.0f64.sin());
        assert!((e.get(2, 2) - expected).norm() < 1e-14);
        assert!(e.get(0, 1).norm() == 0.0);
    }

    #[test]
    fn expm_nilpotent_and_rotation() {
        // Nilpotent: exp([[0, 1], [0, 0]]) = [[1, 1], [0, 1]].
        let n = SquareMatrix::<f64>::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]);
        let e = n.expm().unwrap();
        assert!((e.get(0, 0).re - 1.0).abs() < 1e-15);
        assert!((e.get(0, 1).re - 1.0).abs() < 1e-15);
        assert!(e.get(1, 0).norm() < 1e-15);

        // Rotation generator: exp(θ J) = [[cos, -sin], [sin, cos]].
        let theta = 0.7f64;
        let j = SquareMatrix::<f64>::from_real_rows(&[vec![0.0, -theta], vec![theta, 0.0]]);
        let r = j.expm().unwrap();
        assert!((r.get(0, 0).re - theta.cos()).abs() < 1e-14);
        assert!((r.get(1, 0).re - theta.sin()).abs() < 1e-14);
    }

    #[test]
    fn expm_group_property() {
        let a = SquareMatrix::from_real_rows(&[vec![-1.0, 0.5], vec![-0.3, 0.2]]);
        let e1 = a.scale(0.3).expm().unwrap();
        let e2 = a.scale(0.7).expm().unwrap();
        let direct = a.expm().unwrap();
        let composed = e1.matmul(&e2);
        for i in 0..2 {
            for j in 0..2 {
                assert!((direct.get(i, j) - composed.get(i, j)).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn spec_validation() {
        let a = SquareMatrix::from_real_rows(&[vec![-1.0, 0.5], vec![-0.3, 0.0]]);
        assert!(LinearSystemSpec::new(a.clone(), &[0], vec![c(1.0, 0.0), c(0.1, 0.0)]).is_err());
        assert!(LinearSystemSpec::new(a.clone(), &[2], vec![c(1.0, 0.0), c(0.0, 0.0)]).is_err());
        assert!(LinearSystemSpec::new(a, &[0], vec![c(1.0, 0.0), c(0.0, 0.0)]).is_ok());
    }

    #[test]
    fn memory_integral_matches_analytic_form() {
        // For the test system A Q₀ is nilpotent, so the integrand is
        // A Q₀ A P₀ e^{sA} u₀ and the window integral has the closed form
        // A Q₀ A P₀ A⁻¹ (e^{tA} - e^{(t-t₀)A}) u₀.
        let spec = test_system();
        let (t, t0) = (1.3, 0.5);
        let numeric = spec.memory_integral(t, t0, 20_000).unwrap();

        // Analytic evaluation. Row 0 of A Q₀ A P₀ is (-0.15, 0).
        let a = [[-1.0, 0.5], [-0.3, 0.0]];
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        let inv = [
            [a[1][1] / det, -a[0][1] / det],
            [-a[1][0] / det, a[0][0] / det],
        ];
        let exp_at = |s: f64| {
            SquareMatrix::<f64>::from_real_rows(&[
                vec![a[0][0] * s, a[0][1] * s],
                vec![a[1][0] * s, a[1][1] * s],
            ])
            .expm()
            .unwrap()
        };
        let e_t = exp_at(t);
        let e_tm = exp_at(t - t0);
        // x = A^{-1} (e^{tA} - e^{(t-t0)A}) u0, first component.
        let diff0 = (e_t.get(0, 0) - e_tm.get(0, 0)).re;
        let diff1 = (e_t.get(1, 0) - e_tm.get(1, 0)).re;
        let x0 = inv[0][0] * diff0 + inv[0][1] * diff1;
        let expected = -0.15 * x0;
        assert!(
            (numeric[0].re - expected).abs() < 1e-10,
            "numeric {} vs analytic {expected}",
            numeric[0].re
        );
        assert!(numeric[0].im.abs() < 1e-12);
    }

    #[test]
    fn memory_integral_richardson_check() {
        let spec = test_system();
        let coarse = spec.memory_integral(1.1, 0.5, 5_000).unwrap();
        let fine = spec.memory_integral(1.1, 0.5, 10_000).unwrap();
        assert!((coarse[0] - fine[0]).norm() < 1e-8);
    }

    #[test]
    fn memory_vanishes_when_everything_resolved() {
        // Diagonal A with P the identity: Q = 0, memory identically zero.
        let mut a = SquareMatrix::<f64>::zeros(2);
        a.set(0, 0, c(-0.5, 0.0));
        a.set(1, 1, c(-1.5, 0.0));
        let spec = LinearSystemSpec::new(a, &[0, 1], vec![c(1.0, 0.0), c(0.5, 0.0)]).unwrap();
        let w = spec.memory_integral(1.0, 0.4, 2_000).unwrap();
        assert!(w.iter().all(|v| v.norm() < 1e-15));

        let cmp = hierarchy_oracle(&spec, 0.4, 1, 1e-3, 1.0, 100).unwrap();
        // Zero memory on both sides: deviations are exactly zero.
        assert!(cmp.rel_deviation.iter().all(|&d| d == 0.0));
        assert_eq!(cmp.w_scale, 0.0);
    }

    #[test]
    fn hierarchy_matches_exact_integral_to_closure_order() {
        let spec = test_system();
        let cmp = hierarchy_oracle(&spec, 0.5, 2, 5e-4, 2.5, 200).unwrap();
        // Δt₀ = 0.25: deviation is small but clearly nonzero.
        assert!(cmp.max_rel_deviation > 1e-6);
        assert!(cmp.max_rel_deviation < 0.05, "{}", cmp.max_rel_deviation);
    }

    #[test]
    fn hierarchy_deviation_drops_at_second_order() {
        let spec = test_system();
        let coarse = hierarchy_oracle(&spec, 0.5, 2, 2.5e-4, 2.5, 400).unwrap();
        let fine = hierarchy_oracle(&spec, 0.5, 4, 2.5e-4, 2.5, 400).unwrap();
        let ratio = coarse.max_rel_deviation / fine.max_rel_deviation;
        assert!((3.0..=5.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn finite_memory_converges_to_infinite_memory() {
        // Stable system: at fixed t the windowed integral approaches the
        // full [0, t] integral as t₀ grows.
        let spec = test_system();
        let t = 2.5;
        let full = spec.memory_integral(t, t, 10_000).unwrap()[0];
        let mut prev_err = f64::INFINITY;
        for t0 in [0.5, 1.0, 1.5, 2.0] {
            let w = spec.memory_integral(t, t0, 10_000).unwrap()[0];
            let err = (w - full).norm();
            assert!(err < prev_err, "t0 = {t0}: {err} !< {prev_err}");
            prev_err = err;
        }
    }

    #[test]
    fn quadrature_reference_degenerates_to_single_solve() {
        let ic = FourierField::<f64>::sine(16);
        let nu = ViscosityExpansion::new(0.1, 0.0).unwrap();
        let reference = quadrature_reference(&ic, &nu, 4, 0.001, 0.05, 10, true).unwrap();
        let single = burgers_solve(&ic, 0.1, 0.001, 0.05, 10, true).unwrap();
        for (mean, state) in reference.mean_fields.iter().zip(&single.states) {
            for (a, b) in mean.amplitudes().iter().zip(state.amplitudes()) {
                assert!((a - b).norm() < 1e-13);
            }
        }
        assert!(reference.final_variance.iter().all(|&v| v.abs() < 1e-13));
    }

    #[test]
    fn quadrature_reference_converges_in_node_count() {
        // Doubling the node count changes the mean-energy curve by less
        // than 1e-6 relative once the rule resolves the nu-dependence.
        let ic = FourierField::<f64>::sine(32);
        let nu = ViscosityExpansion::new(0.1, 0.07).unwrap();
        let a = quadrature_reference(&ic, &nu, 16, 0.001, 0.5, 50, true).unwrap();
        let b = quadrature_reference(&ic, &nu, 24, 0.001, 0.5, 50, true).unwrap();
        for (ea, eb) in a.moments.energy.iter().zip(&b.moments.energy) {
            assert!((ea - eb).abs() <= 1e-6 * eb.abs(), "{ea} vs {eb}");
        }
    }

    #[test]
    fn mc_single_sample_equals_deterministic_solve() {
        let ic = FourierField::<f64>::sine(16);
        let nu = ViscosityExpansion::new(0.1, 0.07).unwrap();
        let mc = mc_reference(&ic, &nu, 1, 42, 0.001, 0.05, 10, true).unwrap();
        let single = burgers_solve(&ic, mc.nus[0], 0.001, 0.05, 10, true).unwrap();
        let single_moments =
            MomentSeries::from_fields(single.times.clone(), &single.states);
        for (a, b) in mc.moments.energy.iter().zip(&single_moments.energy) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn mc_is_deterministic_per_seed() {
        let ic = FourierField::<f64>::sine(16);
        let nu = ViscosityExpansion::new(0.1, 0.07).unwrap();
        let a = mc_reference(&ic, &nu, 8, 7, 0.001, 0.02, 10, true).unwrap();
        let b = mc_reference(&ic, &nu, 8, 7, 0.001, 0.02, 10, true).unwrap();
        assert_eq!(a.nus, b.nus);
        assert_eq!(a.moments.energy, b.moments.energy);
        assert_eq!(a.moments.grad_sq, b.moments.grad_sq);
        let other = mc_reference(&ic, &nu, 8, 8, 0.001, 0.02, 10, true).unwrap();
        assert_ne!(a.nus, other.nus);
    }

    #[test]
    fn linear_decay_matches_analytic_mean() {
        let series = linear_decay_gpc(1.0, 8, 0.001, 1.0, 100).unwrap();
        let mean_at_1 = *series.mean.values.last().unwrap();
        let exact = linear_decay_exact_mean(1.0, 1.0);
        assert!((exact - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        assert!((mean_at_1 - exact).abs() < 1e-4, "{mean_at_1} vs {exact}");
        // t = 0 mean is the initial value.
        assert_eq!(series.mean.values[0], 1.0);
        // Variance grows from zero.
        assert_eq!(series.variance.values[0], 0.0);
        assert!(*series.variance.values.last().unwrap() > 0.0);
    }

    #[test]
    fn linear_decay_improves_with_m() {
        let exact = linear_decay_exact_mean(1.0f64, 2.0);
        let err = |m: usize| -> f64 {
            let series = linear_decay_gpc(1.0f64, m, 0.001, 2.0, 200).unwrap();
            (series.mean.values.last().unwrap() - exact).abs()
        };
        assert!(err(8) < err(2));
    }

    #[test]
    fn linear_decay_rejects_tiny_m() {
        assert!(linear_decay_gpc(1.0, 1, 0.001, 1.0, 10).is_err());
    }
}
