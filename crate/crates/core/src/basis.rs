//! Legendre polynomials, Gauss-Legendre quadrature and the normalized
//! triple-product tensor `c_{lmr}`.
//!
//! Legendre polynomials are orthogonal on `[-1, 1]`:
//! `∫ L_i L_j dξ = 2/(2i+1) δ_ij`. Expectations below are taken against
//! the uniform density `1/2` on `[-1, 1]`, so `E[L_r²] = 1/(2r+1)`.

use crate::error::{Error, Result};
use crate::scalar::{cast, Real};

/// Evaluates the Legendre polynomial `L_i(ξ)` by the stable three-term
/// recurrence `(i+1) L_{i+1} = (2i+1) ξ L_i - i L_{i-1}`.
pub fn legendre_eval<T: Real>(order: usize, xi: T) -> T {
    if order == 0 {
        return T::one();
    }
    let mut prev = T::one();
    let mut curr = xi;
    for i in 1..order {
        let i_t = cast::<T>(i as f64);
        let next = ((cast::<T>(2.0) * i_t + T::one()) * xi * curr - i_t * prev)
            / (i_t + T::one());
        prev = curr;
        curr = next;
    }
    curr
}

/// `L_n(ξ)` together with its derivative, via the same recurrence and
/// `L_n'(ξ) = n (ξ L_n - L_{n-1}) / (ξ² - 1)`.
fn legendre_and_derivative<T: Real>(order: usize, xi: T) -> (T, T) {
    if order == 0 {
        return (T::one(), T::zero());
    }
    let mut prev = T::one();
    let mut curr = xi;
    for i in 1..order {
        let i_t = cast::<T>(i as f64);
        let next = ((cast::<T>(2.0) * i_t + T::one()) * xi * curr - i_t * prev)
            / (i_t + T::one());
        prev = curr;
        curr = next;
    }
    let n_t = cast::<T>(order as f64);
    let denom = xi * xi - T::one();
    let deriv = n_t * (xi * curr - prev) / denom;
    (curr, deriv)
}

/// Gauss-Legendre quadrature rule on `[-1, 1]`.
///
/// Nodes are the roots of `L_n`, strictly increasing and symmetric about
/// zero; weights are positive, symmetric, and sum to 2. The `n`-point
/// rule integrates polynomials up to degree `2n - 1` exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> QuadratureRule<T> {
    /// Builds the `n`-point rule. Roots of `L_n` are isolated by the
    /// Bruns bracketing of the zeros of `L_n(cos θ)` and refined by
    /// bisection followed by bracket-guarded Newton steps.
    pub fn gauss_legendre(n: usize) -> Self {
        assert!(n >= 1, "quadrature rule needs at least one node");
        let mut nodes = vec![T::zero(); n];
        let mut weights = vec![T::zero(); n];

        let pi = T::PI();
        let denom = cast::<T>(n as f64) + cast::<T>(0.5);
        // Positive roots: i = 1 is closest to +1.
        for i in 1..=n / 2 {
            let theta_lo = pi * (cast::<T>(i as f64) - cast::<T>(0.5)) / denom;
            let theta_hi = pi * cast::<T>(i as f64) / denom;
            // cos is decreasing, so [cos θ_hi, cos θ_lo] brackets the root.
            let root = refine_root(n, theta_hi.cos(), theta_lo.cos());
            let (_, deriv) = legendre_and_derivative(n, root);
            let w = cast::<T>(2.0) / ((T::one() - root * root) * deriv * deriv);
            // Mirror to keep the rule exactly symmetric.
            nodes[n - i] = root;
            nodes[i - 1] = -root;
            weights[n - i] = w;
            weights[i - 1] = w;
        }
        if n % 2 == 1 {
            let (_, deriv) = legendre_and_derivative(n, T::zero());
            nodes[n / 2] = T::zero();
            weights[n / 2] = cast::<T>(2.0) / (deriv * deriv);
        }
        Self { nodes, weights }
    }

    /// Quadrature nodes, strictly increasing.
    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    /// Quadrature weights, matching [`Self::nodes`].
    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// True when the rule has no nodes (never holds for constructed rules).
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Highest polynomial degree integrated exactly: `2n - 1`.
    pub fn exactness_degree(&self) -> usize {
        2 * self.nodes.len() - 1
    }

    /// `∫_{-1}^{1} f(ξ) dξ` by the rule.
    pub fn integrate(&self, f: impl Fn(T) -> T) -> T {
        self.nodes
            .iter()
            .zip(&self.weights)
            .fold(T::zero(), |acc, (&x, &w)| acc + w * f(x))
    }
}

/// Bisection until the bracket is tight, then Newton polished inside it.
fn refine_root<T: Real>(order: usize, mut lo: T, mut hi: T) -> T {
    let eval = |x: T| legendre_and_derivative(order, x);
    let mut f_lo = eval(lo).0;
    debug_assert!(
        (f_lo * eval(hi).0) <= T::zero(),
        "Bruns bracket must straddle a sign change"
    );
    for _ in 0..20 {
        let mid = (lo + hi) * cast::<T>(0.5);
        let f_mid = eval(mid).0;
        if (f_lo * f_mid) <= T::zero() {
            hi = mid;
        } else {
            lo = mid;
            f_lo = f_mid;
        }
    }
    let mut x = (lo + hi) * cast::<T>(0.5);
    let tol = T::epsilon() * cast::<T>(4.0);
    for _ in 0..100 {
        let (f, df) = eval(x);
        let step = f / df;
        let mut next = x - step;
        if next < lo || next > hi {
            next = (lo + hi) * cast::<T>(0.5);
        }
        let done = (next - x).abs() <= tol * (T::one() + x.abs());
        x = next;
        if done {
            break;
        }
    }
    x
}

/// True when `E[L_l L_m L_r] = 0` by the triangle/parity rule:
/// `l+m < r` or `l+r < m` or `m+r < l` or `l+m+r` odd.
pub fn sparsity_predicate(l: usize, m: usize, r: usize) -> bool {
    l + m < r || l + r < m || m + r < l || (l + m + r) % 2 == 1
}

/// Normalized Legendre triple products
/// `c_{lmr} = E[L_l L_m L_r] / E[L_r²]` for `l, m, r < M`.
///
/// Entries flagged by [`sparsity_predicate`] are stored as exact zeros;
/// the remaining numerators come from Gauss-Legendre quadrature and the
/// denominator `E[L_r²] = 1/(2r+1)` is applied analytically. The tensor
/// is dense with a nonzero mask for inner-loop skipping.
#[derive(Debug, Clone, PartialEq)]
pub struct TripleTensor<T> {
    m: usize,
    values: Vec<T>,
    nonzero: Vec<bool>,
}

impl<T: Real> TripleTensor<T> {
    /// Number of quadrature nodes used when none is specified:
    /// `max(M + 2, ⌈(3M - 2)/2⌉)`, enough for the degree-`3(M-1)`
    /// integrand.
    pub fn default_node_count(m: usize) -> usize {
        (m + 2).max((3 * m - 2).div_ceil(2))
    }

    /// Builds the tensor with the default quadrature rule for `m`.
    pub fn with_default_rule(m: usize) -> Self {
        let rule = QuadratureRule::gauss_legendre(Self::default_node_count(m));
        Self::new(m, &rule).expect("default rule always has enough nodes")
    }

    /// Builds the tensor from an explicit rule. The rule must integrate
    /// degree `3(M-1)` exactly, i.e. have at least `⌈(3M - 2)/2⌉` nodes.
    pub fn new(m: usize, rule: &QuadratureRule<T>) -> Result<Self> {
        assert!(m >= 1, "tensor needs at least one polynomial");
        let required = 3 * (m - 1);
        if rule.exactness_degree() < required {
            return Err(Error::InsufficientQuadrature {
                nodes: rule.len(),
                required,
            });
        }

        // Legendre table: value of L_i at each node.
        let table: Vec<Vec<T>> = rule
            .nodes()
            .iter()
            .map(|&x| (0..m).map(|i| legendre_eval(i, x)).collect())
            .collect();

        let mut values = vec![T::zero(); m * m * m];
        let mut nonzero = vec![false; m * m * m];
        let half = cast::<T>(0.5);
        for l in 0..m {
            for mm in 0..m {
                for r in 0..m {
                    let idx = (l * m + mm) * m + r;
                    if sparsity_predicate(l, mm, r) {
                        continue;
                    }
                    // E[L_l L_m L_r] with the uniform density folded in.
                    let mut numerator = T::zero();
                    for (q, row) in table.iter().enumerate() {
                        numerator += rule.weights()[q] * row[l] * row[mm] * row[r];
                    }
                    numerator = numerator * half;
                    let inv_norm = cast::<T>((2 * r + 1) as f64);
                    values[idx] = numerator * inv_norm;
                    nonzero[idx] = true;
                }
            }
        }
        Ok(Self { m, values, nonzero })
    }

    /// Number of retained polynomials `M`.
    pub fn polynomial_count(&self) -> usize {
        self.m
    }

    /// `c_{lmr}`.
    #[inline]
    pub fn get(&self, l: usize, m: usize, r: usize) -> T {
        self.values[(l * self.m + m) * self.m + r]
    }

    /// True when `c_{lmr}` is structurally nonzero.
    #[inline]
    pub fn is_nonzero(&self, l: usize, m: usize, r: usize) -> bool {
        self.nonzero[(l * self.m + m) * self.m + r]
    }

    /// Count of structurally nonzero entries.
    pub fn nonzero_count(&self) -> usize {
        self.nonzero.iter().filter(|&&b| b).count()
    }

    /// Iterates `(l, m, r, c_{lmr})` over the structurally nonzero entries
    /// in lexicographic order.
    pub fn iter_nonzero(&self) -> impl Iterator<Item = (usize, usize, usize, T)> + '_ {
        let m = self.m;
        (0..m * m * m).filter_map(move |idx| {
            if !self.nonzero[idx] {
                return None;
            }
            let r = idx % m;
            let mm = (idx / m) % m;
            let l = idx / (m * m);
            Some((l, mm, r, self.values[idx]))
        })
    }
}
