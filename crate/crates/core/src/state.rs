//! States in the real probability space: a working distribution paired with a
//! Carathéodory simplex of polytope vertices, plus measurements and entropies.

use serde::{Deserialize, Serialize};

use crate::boolean::Covector;
use crate::error::{Error, Result};
use crate::lp::{LinearSystem, SimplicialRepresentation, EPS_LIN, EPS_ZERO};

/// How the working distribution is selected from the feasible set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Selection {
    MaxEnt,
    Centroid,
    Explicit,
}

impl std::fmt::Display for Selection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Selection::MaxEnt => write!(f, "maxent"),
            Selection::Centroid => write!(f, "centroid"),
            Selection::Explicit => write!(f, "explicit"),
        }
    }
}

/// A quantum state in the real space: the pair of a working distribution and
/// its simplicial representation, with the LP system kept as provenance.
#[derive(Debug, Clone)]
pub struct QuantumStateReal {
    working: Vec<f64>,
    simplex: SimplicialRepresentation,
    system: LinearSystem,
    selection: Selection,
}

impl QuantumStateReal {
    /// Builds the polytope of `system`, picks the working distribution per
    /// `selection` and wraps it with its Carathéodory simplex.
    pub fn make(system: LinearSystem, selection: Selection, explicit: Option<&[f64]>) -> Result<Self> {
        let polytope = system.enumerate_vertices()?;
        let working = match selection {
            Selection::MaxEnt => system.maxent()?.distribution,
            Selection::Centroid => polytope.centroid().point,
            Selection::Explicit => {
                let w = explicit.ok_or(Error::Dimension {
                    expected: system.dim(),
                    actual: 0,
                })?;
                validate_distribution(w)?
            }
        };
        let simplex = polytope.caratheodory(&working)?;
        Ok(QuantumStateReal {
            working,
            simplex,
            system,
            selection,
        })
    }

    /// A state from a caller-supplied simplex and coordinates; the working
    /// distribution is the anchor and the LP system is synthesized from the
    /// span of the vertices (normalization plus the annihilator rows).
    pub fn from_simplex(
        vertices: Vec<Vec<f64>>,
        coords: Vec<f64>,
        register: crate::boolean::Register,
    ) -> Result<Self> {
        let simplex = SimplicialRepresentation::from_parts(vertices, coords)?;
        let working = validate_distribution(&simplex.anchor())?;
        let system = system_from_span(simplex.vertices(), register);
        Ok(QuantumStateReal {
            working,
            simplex,
            system,
            selection: Selection::Explicit,
        })
    }

    /// Assembles a state from parts that were computed together; checks that
    /// the working distribution is the simplex anchor.
    pub(crate) fn assemble(
        working: Vec<f64>,
        simplex: SimplicialRepresentation,
        system: LinearSystem,
        selection: Selection,
    ) -> Result<Self> {
        let anchor = simplex.anchor();
        let dev = working
            .iter()
            .zip(&anchor)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if dev > 1e-8 {
            return Err(Error::OutsidePolytope { residual: dev });
        }
        Ok(QuantumStateReal {
            working,
            simplex,
            system,
            selection,
        })
    }

    pub fn working(&self) -> &[f64] {
        &self.working
    }

    pub fn simplex(&self) -> &SimplicialRepresentation {
        &self.simplex
    }

    pub fn system(&self) -> &LinearSystem {
        &self.system
    }

    pub fn selection(&self) -> Selection {
        self.selection
    }

    /// Number of simplex vertices backing the state.
    pub fn rank(&self) -> usize {
        self.simplex.rank()
    }

    /// Expectation of an observable with respect to the working distribution.
    pub fn expectation(&self, q: &Covector) -> Result<f64> {
        q.dot(&self.working)
    }

    /// A state is pure when its simplicial coordinates are deterministic.
    pub fn is_pure(&self) -> bool {
        self.simplex.coords().iter().any(|&c| c >= 1.0 - EPS_ZERO)
    }

    /// Outcome distribution of a general measurement.
    pub fn measure(&self, povm: &RealPovm) -> Result<Vec<f64>> {
        povm.validate(self.working.len())?;
        let p: Vec<f64> = povm
            .elements
            .iter()
            .map(|q| q.dot(&self.working).map(|x| x.max(0.0)))
            .collect::<Result<_>>()?;
        Ok(p)
    }

    /// Shannon entropy of the working distribution, in bits.
    pub fn chart_entropy(&self) -> f64 {
        shannon_entropy_bits(&self.working)
    }

    /// Shannon entropy of the simplicial coordinates, in bits.
    pub fn simplicial_entropy(&self) -> f64 {
        shannon_entropy_bits(self.simplex.coords())
    }
}

/// Synthesizes the LP system whose solution set is `span(vertices)` cut with
/// the probability simplex: the normalization row plus an orthonormal basis of
/// the orthogonal complement of the span.
pub(crate) fn system_from_span(
    vertices: &[Vec<f64>],
    register: crate::boolean::Register,
) -> LinearSystem {
    use nalgebra::{DMatrix, DVector};
    let d = register.dim();
    let r = vertices.len();
    // padded to square so v_t carries a full orthonormal basis, null space last
    let vmat = DMatrix::from_fn(d, d, |i, j| if i < r { vertices[i][j] } else { 0.0 });
    let svd = vmat.svd(false, true);
    let vt = svd.v_t.expect("v_t requested");
    let smax = svd.singular_values.max();
    let span_rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > 1e-11 * smax.max(1.0))
        .count();
    let m = d - span_rank + 1;
    let mut a = DMatrix::zeros(m, d);
    let mut b = DVector::zeros(m);
    for j in 0..d {
        a[(0, j)] = 1.0;
    }
    b[0] = 1.0;
    for (out, row) in (span_rank..d).enumerate() {
        for j in 0..d {
            a[(out + 1, j)] = vt[(row, j)];
        }
    }
    LinearSystem::from_rows(a, b, register)
}

/// An abstract resolution of the tautology: nonnegative covectors that sum to
/// the all-ones covector.
#[derive(Debug, Clone)]
pub struct RealPovm {
    elements: Vec<Covector>,
    labels: Vec<String>,
}

impl RealPovm {
    pub fn new(elements: Vec<Covector>, labels: Option<Vec<String>>) -> Result<Self> {
        let labels = match labels {
            Some(l) => {
                if l.len() != elements.len() {
                    return Err(Error::InvalidPovm(format!(
                        "{} labels for {} elements",
                        l.len(),
                        elements.len()
                    )));
                }
                l
            }
            None => (0..elements.len()).map(|i| i.to_string()).collect(),
        };
        Ok(RealPovm { elements, labels })
    }

    /// The standard measurement induced by a partition of the states into
    /// decision functions.
    pub fn from_partition(
        parts: &[crate::boolean::DecisionFunction],
        register: &crate::boolean::Register,
    ) -> Result<Self> {
        let elements = parts
            .iter()
            .map(|f| crate::boolean::indicator_covector(f, register))
            .collect::<Result<Vec<_>>>()?;
        let povm = RealPovm::new(elements, None)?;
        povm.validate(register.dim())?;
        Ok(povm)
    }

    pub fn elements(&self) -> &[Covector] {
        &self.elements
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    fn validate(&self, d: usize) -> Result<()> {
        if self.elements.is_empty() {
            return Err(Error::InvalidPovm("no elements".into()));
        }
        let mut sums = vec![0.0; d];
        for q in &self.elements {
            if q.len() != d {
                return Err(Error::Dimension {
                    expected: d,
                    actual: q.len(),
                });
            }
            for (s, &e) in sums.iter_mut().zip(q.entries()) {
                if e < -EPS_ZERO {
                    return Err(Error::InvalidPovm(format!("negative entry {e}")));
                }
                *s += e;
            }
        }
        if sums.iter().any(|&s| (s - 1.0).abs() > EPS_LIN) {
            return Err(Error::InvalidPovm(
                "elements do not sum to the tautology".into(),
            ));
        }
        Ok(())
    }
}

/// Shannon entropy in bits with the `0 log 0 = 0` convention.
pub fn shannon_entropy_bits(p: &[f64]) -> f64 {
    p.iter()
        .map(|&x| {
            if x > 1e-300 {
                -x * x.log2()
            } else {
                0.0
            }
        })
        .sum()
}

/// Renormalizes an array to a probability distribution when its sum is within
/// `1e-9` of one; a larger deviation is an error, never silently fixed.
pub fn validate_distribution(p: &[f64]) -> Result<Vec<f64>> {
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > EPS_LIN {
        return Err(Error::NotADistribution { sum });
    }
    if p.iter().any(|&x| x < -EPS_ZERO) {
        return Err(Error::NotADistribution { sum: f64::NAN });
    }
    Ok(p.iter().map(|&x| (x / sum).max(0.0)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolean::{ConstraintSpec, DecisionFunction, Register};
    use approx::assert_abs_diff_eq;

    fn reg(n: usize) -> Register {
        Register::new(n).unwrap()
    }

    fn singlet_state() -> QuantumStateReal {
        let specs = vec![
            ConstraintSpec::StateSum {
                states: vec![0],
                rhs: 0.0,
            },
            ConstraintSpec::StateSum {
                states: vec![3],
                rhs: 0.0,
            },
            ConstraintSpec::CovectorExpectation {
                covector: vec![-1.0, -1.0, 1.0, 1.0],
                rhs: 0.0,
            },
        ];
        let sys = LinearSystem::build(&specs, &reg(2)).unwrap();
        QuantumStateReal::make(sys, Selection::MaxEnt, None).unwrap()
    }

    fn triplet_system() -> LinearSystem {
        LinearSystem::build(
            &[ConstraintSpec::CovectorExpectation {
                covector: vec![1.0, 0.0, 0.0, -1.0],
                rhs: 0.0,
            }],
            &reg(2),
        )
        .unwrap()
    }

    #[test]
    fn singlet_is_pure_with_the_known_working() {
        for sel in [Selection::MaxEnt, Selection::Centroid] {
            let sys = singlet_state().system().clone();
            let state = QuantumStateReal::make(sys, sel, None).unwrap();
            let expected = [0.0, 0.5, 0.5, 0.0];
            for (w, e) in state.working().iter().zip(expected) {
                assert_abs_diff_eq!(*w, e, epsilon = 1e-12);
            }
            assert!(state.is_pure());
            assert_eq!(state.rank(), 1);
        }
    }

    #[test]
    fn triplet_centroid_working() {
        let state = QuantumStateReal::make(triplet_system(), Selection::Centroid, None).unwrap();
        let expected = [1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0];
        for (w, e) in state.working().iter().zip(expected) {
            assert_abs_diff_eq!(*w, e, epsilon = 1e-12);
        }
        assert!(!state.is_pure());
    }

    #[test]
    fn explicit_epr_weights() {
        let theta: f64 = 1.1;
        let mu1 = 0.5 * (theta / 2.0).cos().powi(2);
        let mu3 = (theta / 2.0).sin().powi(2);
        let w = [mu3 / 2.0, mu1, mu1, mu3 / 2.0];
        let state =
            QuantumStateReal::make(triplet_system(), Selection::Explicit, Some(&w)).unwrap();
        for (a, b) in state.working().iter().zip(w) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-10);
        }
        // explicit selections outside the polytope are rejected
        let bad = [0.5, 0.25, 0.25, 0.0];
        assert!(QuantumStateReal::make(triplet_system(), Selection::Explicit, Some(&bad)).is_err());
    }

    #[test]
    fn triplet_vertex_selection_is_pure() {
        let w = [0.0, 1.0, 0.0, 0.0];
        let state =
            QuantumStateReal::make(triplet_system(), Selection::Explicit, Some(&w)).unwrap();
        assert!(state.is_pure());
        assert_eq!(state.simplicial_entropy(), 0.0);
    }

    #[test]
    fn expectations() {
        let theta: f64 = 0.7;
        let r = reg(1);
        let sys = LinearSystem::build(
            &[ConstraintSpec::CovectorExpectation {
                covector: vec![(theta / 2.0).sin().powi(2), -(theta / 2.0).cos().powi(2)],
                rhs: 0.0,
            }],
            &r,
        )
        .unwrap();
        let qubit = QuantumStateReal::make(sys, Selection::MaxEnt, None).unwrap();
        let s = Covector::new(vec![1.0, -1.0]);
        assert_abs_diff_eq!(qubit.expectation(&s).unwrap(), theta.cos(), epsilon = 1e-9);
        let tautology = Covector::ones(2);
        assert_abs_diff_eq!(qubit.expectation(&tautology).unwrap(), 1.0, epsilon = 1e-12);
        let wrong = Covector::ones(4);
        assert!(qubit.expectation(&wrong).is_err());
    }

    #[test]
    fn measurement_over_partitions() {
        let state = singlet_state();
        let r = reg(2);
        let singletons: Vec<DecisionFunction> =
            (0..4).map(|i| DecisionFunction::new([i])).collect();
        let povm = RealPovm::from_partition(&singletons, &r).unwrap();
        let p = state.measure(&povm).unwrap();
        assert_eq!(p.len(), 4);
        assert_abs_diff_eq!(p[1], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(p.iter().sum::<f64>(), 1.0, epsilon = 1e-9);

        // two-element partition {f, not f} measures (<F>, 1 - <F>)
        let f = DecisionFunction::new([0, 1]);
        let povm =
            RealPovm::from_partition(&[f.clone(), f.complement(&r)], &r).unwrap();
        let p = state.measure(&povm).unwrap();
        let expect_f = state
            .expectation(&crate::boolean::indicator_covector(&f, &r).unwrap())
            .unwrap();
        assert_abs_diff_eq!(p[0], expect_f, epsilon = 1e-12);
        assert_abs_diff_eq!(p[1], 1.0 - expect_f, epsilon = 1e-12);
    }

    #[test]
    fn measurement_components_equal_partition_sums() {
        // brute-force cross-check on all 2-part and 4-part partitions, N <= 3
        use itertools::Itertools;
        for n in 1..=3usize {
            let r = reg(n);
            let d = r.dim();
            let working: Vec<f64> = (1..=d).map(|i| i as f64).collect();
            let total: f64 = working.iter().sum();
            let working: Vec<f64> = working.iter().map(|x| x / total).collect();
            let poly = LinearSystem::build(&[], &r).unwrap();
            let state = QuantumStateReal::make(poly, Selection::Explicit, Some(&working)).unwrap();
            // 2-part partitions from every nonempty proper subset
            for size in 1..d {
                for subset in (0..d).combinations(size) {
                    let f = DecisionFunction::new(subset.clone());
                    let povm =
                        RealPovm::from_partition(&[f.clone(), f.complement(&r)], &r).unwrap();
                    let p = state.measure(&povm).unwrap();
                    let direct: f64 = subset.iter().map(|&i| working[i]).sum();
                    assert_abs_diff_eq!(p[0], direct, epsilon = 1e-9);
                    assert_abs_diff_eq!(p.iter().sum::<f64>(), 1.0, epsilon = 1e-9);
                }
            }
            // a 4-part partition by index modulo 4 (when d >= 4)
            if d >= 4 {
                let parts: Vec<DecisionFunction> = (0..4)
                    .map(|k| DecisionFunction::new((0..d).filter(move |i| i % 4 == k)))
                    .collect();
                let povm = RealPovm::from_partition(&parts, &r).unwrap();
                let p = state.measure(&povm).unwrap();
                for (k, pk) in p.iter().enumerate() {
                    let direct: f64 = (0..d).filter(|i| i % 4 == k).map(|i| working[i]).sum();
                    assert_abs_diff_eq!(*pk, direct, epsilon = 1e-9);
                }
            }
        }
    }

    #[test]
    fn entropies() {
        let singlet = singlet_state();
        assert_abs_diff_eq!(singlet.chart_entropy(), 1.0, epsilon = 1e-12);
        assert_eq!(singlet.simplicial_entropy(), 0.0);

        let centroid =
            QuantumStateReal::make(triplet_system(), Selection::Centroid, None).unwrap();
        let h = shannon_entropy_bits(&[1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0]);
        assert_abs_diff_eq!(centroid.chart_entropy(), h, epsilon = 1e-12);
        assert!((centroid.chart_entropy() - 1.9183).abs() < 1e-4);
        assert_abs_diff_eq!(
            centroid.simplicial_entropy(),
            3.0f64.log2(),
            epsilon = 1e-9
        );

        // deterministic vertex has zero chart entropy
        let sys = LinearSystem::build(&[], &reg(1)).unwrap();
        let det = QuantumStateReal::make(sys, Selection::Explicit, Some(&[1.0, 0.0])).unwrap();
        assert_eq!(det.chart_entropy(), 0.0);
    }

    #[test]
    fn simplicial_entropy_is_bounded_by_log_rank() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let poly = triplet_system().enumerate_vertices().unwrap();
        for _ in 0..50 {
            let anchor = poly.sample_point(&mut rng);
            let sys = triplet_system();
            let state = QuantumStateReal::make(sys, Selection::Explicit, Some(&anchor)).unwrap();
            let r = state.rank() as f64;
            assert!(state.simplicial_entropy() <= r.log2() + 1e-9);
            let _ = rng.gen::<f64>();
        }
    }

    #[test]
    fn distribution_validation() {
        assert!(validate_distribution(&[0.5, 0.5 + 5e-10]).is_ok());
        assert!(validate_distribution(&[0.5, 0.6]).is_err());
        assert!(validate_distribution(&[1.2, -0.2]).is_err());
    }
}
