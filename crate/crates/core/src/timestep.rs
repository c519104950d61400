//! Second-order explicit time stepping (modified Euler / Heun).
//!
//! The two-stage scheme `s* = s + Δt f(t, s)`,
//! `s' = s + (Δt/2)(f(t, s) + f(t + Δt, s*))` has amplification factor
//! `1 + z + z²/2` on `du/dt = λu` and real stability interval `[-2, 0]`.

use num_complex::Complex;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::scalar::{cast, Real};

/// Vector-space operations the integrator needs from a state type.
pub trait OdeState: Clone {
    type Scalar: Real;

    /// `self += a * other`.
    fn scaled_add(&mut self, a: Self::Scalar, other: &Self);

    /// True when every component is finite.
    fn all_finite(&self) -> bool;
}

impl<T: Real> OdeState for Vec<Complex<T>> {
    type Scalar = T;

    fn scaled_add(&mut self, a: T, other: &Self) {
        debug_assert_eq!(self.len(), other.len());
        for (s, o) in self.iter_mut().zip(other) {
            *s += *o * a;
        }
    }

    fn all_finite(&self) -> bool {
        self.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

impl<T: Real> OdeState for crate::field::FourierField<T> {
    type Scalar = T;

    fn scaled_add(&mut self, a: T, other: &Self) {
        debug_assert_eq!(self.mode_count(), other.mode_count());
        for k in self.min_wavenumber()..=self.max_wavenumber() {
            self.set(k, self.get(k) + other.get(k) * a);
        }
    }

    fn all_finite(&self) -> bool {
        self.amplitudes()
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

/// One Heun step from `(t, state)`; errors when the result is
/// non-finite.
pub fn heun_step<S, F>(state: &S, t: S::Scalar, dt: S::Scalar, rhs: &F) -> Result<S>
where
    S: OdeState,
    F: Fn(S::Scalar, &S) -> S,
{
    let k1 = rhs(t, state);
    let mut predictor = state.clone();
    predictor.scaled_add(dt, &k1);
    let k2 = rhs(t + dt, &predictor);
    let half_dt = dt * cast::<S::Scalar>(0.5);
    let mut out = state.clone();
    out.scaled_add(half_dt, &k1);
    out.scaled_add(half_dt, &k2);
    if !out.all_finite() {
        return Err(Error::BlowUp {
            step: 0,
            time: t.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(out)
}

/// Time series of snapshots at a fixed stride.
#[derive(Debug, Clone)]
pub struct Trajectory<S: OdeState> {
    /// Snapshot times, uniformly spaced at `Δt * stride`.
    pub times: Vec<S::Scalar>,
    /// Snapshots; the first is the initial state.
    pub states: Vec<S>,
    /// Set when integration aborted on a non-finite state; holds the
    /// failing step index.
    pub blow_up: Option<usize>,
}

impl<S: OdeState> Trajectory<S> {
    /// Final recorded state.
    pub fn last(&self) -> &S {
        self.states.last().expect("trajectory holds the initial state")
    }
}

/// Integrates with fixed step `dt` from `t = 0` to `t_end`, recording a
/// snapshot every `stride` steps. `t_end` must be an integer multiple of
/// `dt` and `stride` must divide the step count. A blow-up truncates the
/// trajectory and sets the error flag instead of failing the call.
pub fn integrate<S, F>(state0: S, rhs: &F, dt: S::Scalar, t_end: S::Scalar, stride: usize) -> Result<Trajectory<S>>
where
    S: OdeState,
    F: Fn(S::Scalar, &S) -> S,
{
    integrate_with(state0, rhs, dt, t_end, stride, |_s: &mut S| {})
}

/// [`integrate`] with a projection applied to the state after every
/// step (e.g. zeroing the unpaired Fourier mode).
pub fn integrate_with<S, F, P>(
    state0: S,
    rhs: &F,
    dt: S::Scalar,
    t_end: S::Scalar,
    stride: usize,
    mut post_step: P,
) -> Result<Trajectory<S>>
where
    S: OdeState,
    F: Fn(S::Scalar, &S) -> S,
    P: FnMut(&mut S),
{
    let steps = step_count(dt, t_end)?;
    if stride == 0 || steps % stride != 0 {
        return Err(Error::StrideMismatch { stride, steps });
    }

    let mut trajectory = Trajectory {
        times: Vec::with_capacity(steps / stride + 1),
        states: Vec::with_capacity(steps / stride + 1),
        blow_up: None,
    };
    trajectory.times.push(S::Scalar::zero());
    trajectory.states.push(state0.clone());

    let mut state = state0;
    for step in 1..=steps {
        let t = dt * cast::<S::Scalar>((step - 1) as f64);
        match heun_step(&state, t, dt, rhs) {
            Ok(mut next) => {
                post_step(&mut next);
                state = next;
            }
            Err(_) => {
                trajectory.blow_up = Some(step);
                return Ok(trajectory);
            }
        }
        if step % stride == 0 {
            trajectory.times.push(dt * cast::<S::Scalar>(step as f64));
            trajectory.states.push(state.clone());
        }
    }
    Ok(trajectory)
}

/// Number of steps in `[0, t_end]`; `t_end` must be an integer multiple
/// of `dt` (to a 1e-9 relative tolerance).
pub fn step_count<T: Real>(dt: T, t_end: T) -> Result<usize> {
    if dt <= T::zero() || t_end < T::zero() {
        return Err(Error::Precondition(format!(
            "needs dt > 0 and t_end >= 0 (got dt = {dt}, t_end = {t_end})"
        )));
    }
    let ratio = t_end / dt;
    let steps = ratio.round();
    if (ratio - steps).abs() > cast::<T>(1e-9) * (T::one() + ratio.abs()) {
        return Err(Error::StepMismatch {
            t_end: t_end.to_f64().unwrap_or(f64::NAN),
            dt: dt.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(steps.to_f64().unwrap_or(0.0) as usize)
}
