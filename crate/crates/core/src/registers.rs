//! Composition of two registers in the real space: products, marginals,
//! entanglement measures, the partial system of a sub-register, non-signaling
//! checks and purification.
//!
//! The global index convention is A-major: `w_c = w_a * d_b + w_b`, matching
//! the tensor-product ordering of the Hilbert module so that diagonals and
//! partial traces line up with marginals exactly.

use nalgebra::DMatrix;

use crate::boolean::Register;
use crate::error::{Error, Result};
use crate::lp::EPS_ZERO;
use crate::state::{shannon_entropy_bits, system_from_span, QuantumStateReal};

/// A split of an `n_a + n_b` variable register into two sub-registers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BipartiteSplit {
    n_a: usize,
    n_b: usize,
}

/// Which side of a split an operation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    A,
    B,
}

impl BipartiteSplit {
    pub fn new(n_a: usize, n_b: usize) -> Result<Self> {
        Register::new(n_a)?;
        Register::new(n_b)?;
        Register::new(n_a + n_b)?;
        Ok(BipartiteSplit { n_a, n_b })
    }

    pub fn n_a(&self) -> usize {
        self.n_a
    }

    pub fn n_b(&self) -> usize {
        self.n_b
    }

    pub fn dim_a(&self) -> usize {
        1 << self.n_a
    }

    pub fn dim_b(&self) -> usize {
        1 << self.n_b
    }

    pub fn dim(&self) -> usize {
        1 << (self.n_a + self.n_b)
    }

    pub fn register_a(&self) -> Register {
        Register::new(self.n_a).expect("validated")
    }

    pub fn register_b(&self) -> Register {
        Register::new(self.n_b).expect("validated")
    }

    pub fn register(&self) -> Register {
        Register::new(self.n_a + self.n_b).expect("validated")
    }

    fn check(&self, w_c: &[f64]) -> Result<()> {
        if w_c.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                actual: w_c.len(),
            });
        }
        Ok(())
    }
}

/// Outer product of two distributions, flattened A-major.
pub fn product(w_a: &[f64], w_b: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(w_a.len() * w_b.len());
    for &a in w_a {
        for &b in w_b {
            out.push(a * b);
        }
    }
    out
}

/// Marginal distribution of the requested side.
pub fn marginal(w_c: &[f64], split: &BipartiteSplit, side: Side) -> Result<Vec<f64>> {
    split.check(w_c)?;
    let (da, db) = (split.dim_a(), split.dim_b());
    match side {
        Side::A => Ok((0..da)
            .map(|a| (0..db).map(|b| w_c[a * db + b]).sum())
            .collect()),
        Side::B => Ok((0..db)
            .map(|b| (0..da).map(|a| w_c[a * db + b]).sum())
            .collect()),
    }
}

/// Relative entropy of the joint distribution against the product of its own
/// marginals, in bits. Zero exactly when the distribution is separable.
pub fn entanglement_relative_entropy(w_c: &[f64], split: &BipartiteSplit) -> Result<f64> {
    let w_a = marginal(w_c, split, Side::A)?;
    let w_b = marginal(w_c, split, Side::B)?;
    let reference = product(&w_a, &w_b);
    let mut s = 0.0;
    for (&p, &q) in w_c.iter().zip(&reference) {
        if p > 1e-300 {
            // p > 0 forces both marginals positive, hence q > 0
            debug_assert!(q > 0.0);
            s += p * (p / q).log2();
        }
    }
    Ok(s.max(0.0))
}

/// Relative entropy against an arbitrary product reference, in bits. Used to
/// check minimality of [`entanglement_relative_entropy`]; infinite when the
/// joint puts weight outside the reference support.
pub fn relative_entropy_to_product(
    w_c: &[f64],
    p_a: &[f64],
    p_b: &[f64],
    split: &BipartiteSplit,
) -> Result<f64> {
    split.check(w_c)?;
    let reference = product(p_a, p_b);
    let mut s = 0.0;
    for (&p, &q) in w_c.iter().zip(&reference) {
        if p > 1e-300 {
            if q <= 0.0 {
                return Ok(f64::INFINITY);
            }
            s += p * (p / q).log2();
        }
    }
    Ok(s)
}

/// `H(A) + H(B) - H(A,B)` in bits; equals the entanglement relative entropy.
pub fn mutual_information(w_c: &[f64], split: &BipartiteSplit) -> Result<f64> {
    let h_a = shannon_entropy_bits(&marginal(w_c, split, Side::A)?);
    let h_b = shannon_entropy_bits(&marginal(w_c, split, Side::B)?);
    Ok(h_a + h_b - shannon_entropy_bits(w_c))
}

/// The LP system a sub-register inherits from a global distribution, together
/// with the sub-state whose working distribution is the marginal.
///
/// The conditional distributions `v_{w_b}(w_a) = P(w_a | w_b)` (over the
/// remote outcomes with nonzero probability) span a subspace of rank `r`; the
/// returned system has rank `d_side - r + 1` and its polytope is that span cut
/// with the simplex.
pub fn partial_lp_system(
    w_c: &[f64],
    split: &BipartiteSplit,
    side: Side,
) -> Result<(crate::lp::LinearSystem, QuantumStateReal)> {
    split.check(w_c)?;
    let (da, db) = (split.dim_a(), split.dim_b());
    let (dim_own, dim_remote, register) = match side {
        Side::A => (da, db, split.register_a()),
        Side::B => (db, da, split.register_b()),
    };
    let joint = |own: usize, remote: usize| -> f64 {
        match side {
            Side::A => w_c[own * db + remote],
            Side::B => w_c[remote * db + own],
        }
    };
    let mut conditionals: Vec<Vec<f64>> = Vec::new();
    for remote in 0..dim_remote {
        let nu: f64 = (0..dim_own).map(|own| joint(own, remote)).sum();
        if nu > EPS_ZERO {
            conditionals.push((0..dim_own).map(|own| joint(own, remote) / nu).collect());
        }
    }
    // conditional span rank via singular values, relative threshold
    let vmat = DMatrix::from_fn(conditionals.len(), dim_own, |i, j| conditionals[i][j]);
    let svd = vmat.svd(false, false);
    let smax = svd.singular_values.max();
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > 1e-10 * smax.max(1.0))
        .count();
    // keep a spanning subset of the conditionals for the system synthesis
    let mut spanning: Vec<Vec<f64>> = Vec::new();
    for v in &conditionals {
        if spanning.len() == rank {
            break;
        }
        let mut candidate = spanning.clone();
        candidate.push(v.clone());
        let m = DMatrix::from_fn(candidate.len(), dim_own, |i, j| candidate[i][j]);
        let svd = m.svd(false, false);
        let smax = svd.singular_values.max();
        let r = svd
            .singular_values
            .iter()
            .filter(|&&s| s > 1e-10 * smax.max(1.0))
            .count();
        if r == candidate.len() {
            spanning = candidate;
        }
    }
    let system = system_from_span(&spanning, register);
    let working = marginal(w_c, split, side)?;
    let polytope = system.enumerate_vertices()?;
    let simplex = polytope.caratheodory(&working)?;
    let state = QuantumStateReal::from_simplex(
        simplex.vertices().to_vec(),
        simplex.coords().to_vec(),
        register,
    )?;
    Ok((system, state))
}

/// Checks that the marginal of `side` is the same across a family of global
/// distributions indexed by the remote setting. Returns the verdict at
/// tolerance `1e-9` and the maximum infinity-norm deviation observed.
pub fn non_signaling_check(
    family: &[Vec<f64>],
    split: &BipartiteSplit,
    side: Side,
) -> Result<(bool, f64)> {
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let reference = marginal(&family[0], split, side)?;
    let mut max_dev = 0.0f64;
    for w in &family[1..] {
        let m = marginal(w, split, side)?;
        let dev = reference
            .iter()
            .zip(&m)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        max_dev = max_dev.max(dev);
    }
    Ok((max_dev <= 1e-9, max_dev))
}

/// Lifts a state to a joint distribution on `d_a * d_b` entries whose A-side
/// marginal is the working distribution: the i-th simplex vertex is paired
/// with the i-th ancilla basis vector, `w_c[(w_a; i)] = mu_i w_i(w_a)`.
pub fn purify(state: &QuantumStateReal, d_b: usize) -> Result<Vec<f64>> {
    let r = state.rank();
    if d_b < r {
        return Err(Error::AncillaTooSmall { d_b, rank: r });
    }
    let d_a = state.working().len();
    let mut w_c = vec![0.0; d_a * d_b];
    for (i, (vertex, &mu)) in state
        .simplex()
        .vertices()
        .iter()
        .zip(state.simplex().coords())
        .enumerate()
    {
        for (a, &w) in vertex.iter().enumerate() {
            w_c[a * d_b + i] = mu * w;
        }
    }
    Ok(w_c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolean::ConstraintSpec;
    use crate::lp::LinearSystem;
    use crate::state::Selection;
    use approx::assert_abs_diff_eq;

    fn split11() -> BipartiteSplit {
        BipartiteSplit::new(1, 1).unwrap()
    }

    fn singlet_working() -> Vec<f64> {
        vec![0.0, 0.5, 0.5, 0.0]
    }

    fn epr_working(delta: f64) -> Vec<f64> {
        let c = delta.cos();
        vec![
            0.25 * (1.0 - c),
            0.25 * (1.0 + c),
            0.25 * (1.0 + c),
            0.25 * (1.0 - c),
        ]
    }

    #[test]
    fn products() {
        assert_eq!(product(&[1.0, 0.0], &[0.0, 1.0]), vec![0.0, 1.0, 0.0, 0.0]);
        assert_eq!(
            product(&[0.5, 0.5], &[0.5, 0.5]),
            vec![0.25, 0.25, 0.25, 0.25]
        );
        let p = product(&[1.0 / 3.0, 2.0 / 3.0], &[0.25, 0.75]);
        let expected = [1.0 / 12.0, 0.25, 1.0 / 6.0, 0.5];
        for (a, b) in p.iter().zip(expected) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(p.iter().sum::<f64>(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn marginals() {
        let w = singlet_working();
        let m = marginal(&w, &split11(), Side::A).unwrap();
        assert_eq!(m, vec![0.5, 0.5]);

        let w = product(&[0.3, 0.7], &[0.6, 0.4]);
        let a = marginal(&w, &split11(), Side::A).unwrap();
        let b = marginal(&w, &split11(), Side::B).unwrap();
        for (x, e) in a.iter().zip([0.3, 0.7]) {
            assert_abs_diff_eq!(*x, e, epsilon = 1e-12);
        }
        for (x, e) in b.iter().zip([0.6, 0.4]) {
            assert_abs_diff_eq!(*x, e, epsilon = 1e-12);
        }

        let w = epr_working(0.0);
        let m = marginal(&w, &split11(), Side::A).unwrap();
        assert_eq!(m, vec![0.5, 0.5]);
    }

    #[test]
    fn entanglement_measures() {
        let split = split11();
        let sep = product(&[0.3, 0.7], &[0.6, 0.4]);
        assert_abs_diff_eq!(
            entanglement_relative_entropy(&sep, &split).unwrap(),
            0.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            entanglement_relative_entropy(&singlet_working(), &split).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        // at delta = pi/2 the joint is uniform, hence separable
        let w = epr_working(std::f64::consts::FRAC_PI_2);
        assert_abs_diff_eq!(
            entanglement_relative_entropy(&w, &split).unwrap(),
            0.0,
            epsilon = 1e-12
        );
        // identity with mutual information
        for w in [sep, singlet_working(), epr_working(0.9)] {
            assert_abs_diff_eq!(
                entanglement_relative_entropy(&w, &split).unwrap(),
                mutual_information(&w, &split).unwrap(),
                epsilon = 1e-9
            );
        }
    }

    #[test]
    fn partial_system_of_a_product_is_pure() {
        let w = product(&[0.3, 0.7], &[0.6, 0.4]);
        let (sys, state) = partial_lp_system(&w, &split11(), Side::A).unwrap();
        assert_eq!(sys.rank(), 2); // rank r_a = 1, m = d - r + 1 = 2
        assert!(state.is_pure());
        for (x, e) in state.working().iter().zip([0.3, 0.7]) {
            assert_abs_diff_eq!(*x, e, epsilon = 1e-9);
        }
    }

    #[test]
    fn partial_system_of_the_singlet_is_the_tautology() {
        let (sys, state) = partial_lp_system(&singlet_working(), &split11(), Side::A).unwrap();
        assert_eq!(sys.rank(), 1);
        for (x, e) in state.working().iter().zip([0.5, 0.5]) {
            assert_abs_diff_eq!(*x, e, epsilon = 1e-12);
        }
        assert!(!state.is_pure());
        // the marginal solves the returned system
        assert!(sys.residual(state.working()) <= 1e-9);
    }

    #[test]
    fn partial_system_of_epr() {
        let (sys, state) = partial_lp_system(&epr_working(0.8), &split11(), Side::A).unwrap();
        assert_eq!(sys.rank(), 1);
        for (x, e) in state.working().iter().zip([0.5, 0.5]) {
            assert_abs_diff_eq!(*x, e, epsilon = 1e-12);
        }
    }

    #[test]
    fn non_signaling() {
        let split = split11();
        let family: Vec<Vec<f64>> = [0.0, 0.4, 1.1, 2.9]
            .iter()
            .map(|&t| epr_working(t))
            .collect();
        let (ok, dev) = non_signaling_check(&family, &split, Side::A).unwrap();
        assert!(ok);
        assert!(dev <= 1e-12);

        // inject signaling: the A marginal depends on the remote setting
        let signaling = vec![vec![0.25, 0.25, 0.25, 0.25], vec![0.4, 0.4, 0.1, 0.1]];
        let (ok, dev) = non_signaling_check(&signaling, &split, Side::A).unwrap();
        assert!(!ok);
        assert!(dev > 0.1);
    }

    #[test]
    fn purification() {
        // a pure state purifies to itself
        let r1 = crate::boolean::Register::new(1).unwrap();
        let sys = LinearSystem::build(&[], &r1).unwrap();
        let pure = QuantumStateReal::make(sys, Selection::Explicit, Some(&[1.0, 0.0])).unwrap();
        assert_eq!(purify(&pure, 1).unwrap(), vec![1.0, 0.0]);

        // one-bit mixed state lifts to the diagonal pair distribution
        let sys = LinearSystem::build(&[], &r1).unwrap();
        let (mu1, mu2) = (0.3, 0.7);
        let mixed =
            QuantumStateReal::make(sys, Selection::Explicit, Some(&[mu1, mu2])).unwrap();
        let w_c = purify(&mixed, 2).unwrap();
        let expected = [mu1, 0.0, 0.0, mu2];
        for (x, e) in w_c.iter().zip(expected) {
            assert_abs_diff_eq!(*x, e, epsilon = 1e-12);
        }
        assert!(matches!(
            purify(&mixed, 1),
            Err(Error::AncillaTooSmall { .. })
        ));

        // triplet centroid: purify then marginalize recovers the working
        let r2 = crate::boolean::Register::new(2).unwrap();
        let sys = LinearSystem::build(
            &[ConstraintSpec::CovectorExpectation {
                covector: vec![1.0, 0.0, 0.0, -1.0],
                rhs: 0.0,
            }],
            &r2,
        )
        .unwrap();
        let state = QuantumStateReal::make(sys, Selection::Centroid, None).unwrap();
        let w_c = purify(&state, 4).unwrap();
        assert_eq!(w_c.len(), 16);
        let split = BipartiteSplit::new(2, 2).unwrap();
        let back = marginal(&w_c, &split, Side::A).unwrap();
        for (x, e) in back.iter().zip(state.working()) {
            assert_abs_diff_eq!(*x, *e, epsilon = 1e-12);
        }
    }
}
