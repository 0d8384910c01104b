//! Boolean registers, classical states and the constraint grammar.
//!
//! A register of `N` binary variables has `d = 2^N` classical states, one per
//! complete assignment. States are indexed by the big-endian binary encoding of
//! the assignment: variable 1 is the most significant bit, so for `N = 4` the
//! assignment `x1 x2 x3 x4` has index `8*x1 + 4*x2 + 2*x3 + x4`. This is the
//! single canonical ordering used everywhere in the crate.
//!
//! Constraints on the register are parsed into rows `(a, b)` of the linear
//! system `a . p = b` over the complete-state probabilities. Consistency
//! equations between partial and complete probabilities hold identically once
//! every partial probability is rewritten as a sum of complete-state
//! probabilities, so [`universal_equations`] only emits the normalization row.
//!
//! # Constraint file format
//!
//! Line oriented text, `#` starts a comment:
//!
//! ```text
//! vars 2
//! req 1,2 = 0          # probability of the partial requirement (X1; X2)
//! states {0,3} = 1/2   # sum of complete-state probabilities, 0-based indices
//! expect 1,0,0,-1 = 0  # expectation of a covector, d entries
//! ```
//!
//! Integers parse exactly; rationals `a/b` are evaluated as decimal division.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};

/// A register of `n_vars` binary variables with `d = 2^n_vars` classical states.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Register {
    n_vars: usize,
    d: usize,
}

impl Register {
    /// Register sizes are capped at 8 variables (d = 256).
    pub fn new(n_vars: usize) -> Result<Self> {
        if !(1..=8).contains(&n_vars) {
            return Err(Error::RegisterSize(n_vars));
        }
        Ok(Register {
            n_vars,
            d: 1 << n_vars,
        })
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    /// Dimension of the probability space, `2^n_vars`.
    pub fn dim(&self) -> usize {
        self.d
    }
}

/// One complete assignment of all variables, identified by its index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassicalState {
    index: usize,
    assignment: Vec<bool>,
}

impl ClassicalState {
    pub fn from_index(index: usize, register: &Register) -> Result<Self> {
        if index >= register.dim() {
            return Err(Error::StateIndex {
                index,
                dim: register.dim(),
            });
        }
        let n = register.n_vars();
        let assignment = (0..n).map(|i| (index >> (n - 1 - i)) & 1 == 1).collect();
        Ok(ClassicalState { index, assignment })
    }

    pub fn index(&self) -> usize {
        self.index
    }

    /// `assignment()[i]` is the value of variable `i + 1`.
    pub fn assignment(&self) -> &[bool] {
        &self.assignment
    }
}

impl fmt::Display for ClassicalState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &bit in &self.assignment {
            write!(f, "{}", if bit { '1' } else { '0' })?;
        }
        Ok(())
    }
}

/// Lists the `d` classical states of a register in index order.
pub fn enumerate_states(register: &Register) -> Vec<ClassicalState> {
    (0..register.dim())
        .map(|i| ClassicalState::from_index(i, register).expect("index in range"))
        .collect()
}

/// A decision function, stored as the set of classical states on which it holds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecisionFunction {
    support: BTreeSet<usize>,
}

impl DecisionFunction {
    pub fn new(support: impl IntoIterator<Item = usize>) -> Self {
        DecisionFunction {
            support: support.into_iter().collect(),
        }
    }

    /// The tautology holds on every classical state.
    pub fn tautology(register: &Register) -> Self {
        Self::new(0..register.dim())
    }

    /// All states consistent with a conjunction of literals. A positive literal
    /// `i` requires variable `i` true, a negative literal `-i` requires it false.
    pub fn from_literals(literals: &[i32], register: &Register) -> Result<Self> {
        let n = register.n_vars();
        let mut required: Vec<Option<bool>> = vec![None; n];
        for &lit in literals {
            let var = lit.unsigned_abs() as usize;
            if lit == 0 || var > n {
                return Err(Error::InvalidLiteral {
                    literal: lit,
                    n_vars: n,
                });
            }
            let value = lit > 0;
            match required[var - 1] {
                Some(prev) if prev != value => return Err(Error::ContradictoryLiterals(var)),
                _ => required[var - 1] = Some(value),
            }
        }
        let support = (0..register.dim()).filter(|&idx| {
            required.iter().enumerate().all(|(i, req)| match req {
                Some(v) => ((idx >> (n - 1 - i)) & 1 == 1) == *v,
                None => true,
            })
        });
        Ok(Self::new(support))
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.support.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn contains(&self, state: usize) -> bool {
        self.support.contains(&state)
    }

    /// Complement within the register, `not f`.
    pub fn complement(&self, register: &Register) -> Self {
        Self::new((0..register.dim()).filter(|i| !self.support.contains(i)))
    }
}

/// A real function of the classical states; the dual object to a distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct Covector {
    entries: Vec<f64>,
}

impl Covector {
    pub fn new(entries: Vec<f64>) -> Self {
        debug_assert!(entries.iter().all(|x| x.is_finite()));
        Covector { entries }
    }

    pub fn ones(d: usize) -> Self {
        Covector {
            entries: vec![1.0; d],
        }
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Dual form `sum_w q_w p_w`.
    pub fn dot(&self, p: &[f64]) -> Result<f64> {
        if p.len() != self.entries.len() {
            return Err(Error::Dimension {
                expected: self.entries.len(),
                actual: p.len(),
            });
        }
        Ok(self.entries.iter().zip(p).map(|(q, w)| q * w).sum())
    }
}

/// Indicator covector of a decision function: entry 1 on the support, else 0.
pub fn indicator_covector(f: &DecisionFunction, register: &Register) -> Result<Covector> {
    let d = register.dim();
    let mut entries = vec![0.0; d];
    for idx in f.support() {
        if idx >= d {
            return Err(Error::StateIndex { index: idx, dim: d });
        }
        entries[idx] = 1.0;
    }
    Ok(Covector::new(entries))
}

/// One constraint of the prior, before conversion to a linear equation.
#[derive(Debug, Clone, PartialEq)]
pub enum ConstraintSpec {
    /// `P(l1; l2; ...) = rhs` for a conjunction of literals.
    RequirementProb { literals: Vec<i32>, rhs: f64 },
    /// Sum of complete-state probabilities over a state set.
    StateSum { states: Vec<usize>, rhs: f64 },
    /// Expectation of an arbitrary covector.
    CovectorExpectation { covector: Vec<f64>, rhs: f64 },
}

impl ConstraintSpec {
    /// `P(left) = P(right)`, encoded as the expectation of the difference of the
    /// two indicator covectors with right-hand side zero.
    pub fn requirement_equality(left: &[i32], right: &[i32], register: &Register) -> Result<Self> {
        let a = indicator_covector(&DecisionFunction::from_literals(left, register)?, register)?;
        let b = indicator_covector(&DecisionFunction::from_literals(right, register)?, register)?;
        let covector = a
            .entries()
            .iter()
            .zip(b.entries())
            .map(|(x, y)| x - y)
            .collect();
        Ok(ConstraintSpec::CovectorExpectation { covector, rhs: 0.0 })
    }

    /// The row `(a, b)` such that `a . p = b` expresses the constraint over
    /// complete-state probabilities.
    pub fn to_linear_equation(&self, register: &Register) -> Result<(Covector, f64)> {
        let d = register.dim();
        match self {
            ConstraintSpec::RequirementProb { literals, rhs } => {
                check_probability(*rhs)?;
                if literals.len() > register.n_vars() {
                    return Err(Error::InvalidLiteral {
                        literal: literals[register.n_vars()],
                        n_vars: register.n_vars(),
                    });
                }
                let f = DecisionFunction::from_literals(literals, register)?;
                Ok((indicator_covector(&f, register)?, *rhs))
            }
            ConstraintSpec::StateSum { states, rhs } => {
                check_probability(*rhs)?;
                let f = DecisionFunction::new(states.iter().copied());
                for &s in states {
                    if s >= d {
                        return Err(Error::StateIndex { index: s, dim: d });
                    }
                }
                Ok((indicator_covector(&f, register)?, *rhs))
            }
            ConstraintSpec::CovectorExpectation { covector, rhs } => {
                if covector.len() != d {
                    return Err(Error::Dimension {
                        expected: d,
                        actual: covector.len(),
                    });
                }
                Ok((Covector::new(covector.clone()), *rhs))
            }
        }
    }
}

fn check_probability(value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::ProbabilityRange { value });
    }
    Ok(())
}

/// The universal rows that hold for every prior. In the complete-probability
/// basis the partial/complete consistency equations are identities, so the only
/// live row is the normalization `sum_w p_w = 1`.
pub fn universal_equations(register: &Register) -> Vec<(Covector, f64)> {
    vec![(Covector::ones(register.dim()), 1.0)]
}

/// Parses the text constraint format. Returns the register and the constraint
/// list in file order.
pub fn parse_constraint_file(text: &str) -> Result<(Register, Vec<ConstraintSpec>)> {
    let mut register: Option<Register> = None;
    let mut constraints = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix("vars") {
            if register.is_some() {
                return Err(Error::parse(line, "duplicate vars header"));
            }
            let n: usize = rest
                .trim()
                .parse()
                .map_err(|_| Error::parse(line, format!("invalid vars count '{}'", rest.trim())))?;
            register = Some(Register::new(n).map_err(|e| Error::parse(line, e.to_string()))?);
            continue;
        }
        let reg = register
            .as_ref()
            .ok_or_else(|| Error::parse(line, "constraint before the vars header"))?;
        let (lhs, rhs) = content
            .split_once('=')
            .ok_or_else(|| Error::parse(line, "expected '='"))?;
        let value = parse_number(rhs.trim(), line)?;
        let lhs = lhs.trim();
        let spec = if let Some(body) = lhs.strip_prefix("req") {
            let literals = body
                .trim()
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<i32>()
                        .map_err(|_| Error::parse(line, format!("invalid literal '{}'", t.trim())))
                })
                .collect::<Result<Vec<_>>>()?;
            ConstraintSpec::RequirementProb {
                literals,
                rhs: value,
            }
        } else if let Some(body) = lhs.strip_prefix("states") {
            let body = body.trim();
            let inner = body
                .strip_prefix('{')
                .and_then(|s| s.strip_suffix('}'))
                .ok_or_else(|| Error::parse(line, "expected '{i,j,...}' after states"))?;
            let states = inner
                .split(',')
                .filter(|t| !t.trim().is_empty())
                .map(|t| {
                    t.trim().parse::<usize>().map_err(|_| {
                        Error::parse(line, format!("invalid state index '{}'", t.trim()))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            ConstraintSpec::StateSum { states, rhs: value }
        } else if let Some(body) = lhs.strip_prefix("expect") {
            let covector = body
                .trim()
                .split(',')
                .map(|t| parse_number(t.trim(), line))
                .collect::<Result<Vec<_>>>()?;
            if covector.len() != reg.dim() {
                return Err(Error::parse(
                    line,
                    format!("expected {} covector entries, got {}", reg.dim(), covector.len()),
                ));
            }
            ConstraintSpec::CovectorExpectation {
                covector,
                rhs: value,
            }
        } else {
            return Err(Error::parse(
                line,
                format!("unknown directive '{}'", lhs.split_whitespace().next().unwrap_or("")),
            ));
        };
        // surface bad rows (range, contradictions) with their line number
        spec.to_linear_equation(reg)
            .map_err(|e| Error::parse(line, e.to_string()))?;
        constraints.push(spec);
    }
    let register = register.ok_or_else(|| Error::parse(0, "missing vars header"))?;
    Ok((register, constraints))
}

/// Integers exactly, `a/b` as decimal division, anything else as a float.
fn parse_number(token: &str, line: usize) -> Result<f64> {
    if let Some((num, den)) = token.split_once('/') {
        let n: i64 = num
            .trim()
            .parse()
            .map_err(|_| Error::parse(line, format!("invalid rational '{token}'")))?;
        let d: i64 = den
            .trim()
            .parse()
            .map_err(|_| Error::parse(line, format!("invalid rational '{token}'")))?;
        if d == 0 {
            return Err(Error::parse(line, "zero denominator"));
        }
        return Ok(n as f64 / d as f64);
    }
    if let Ok(n) = token.parse::<i64>() {
        return Ok(n as f64);
    }
    token
        .parse::<f64>()
        .map_err(|_| Error::parse(line, format!("invalid number '{token}'")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reg(n: usize) -> Register {
        Register::new(n).unwrap()
    }

    #[test]
    fn enumerate_base_case() {
        let states = enumerate_states(&reg(1));
        assert_eq!(states.len(), 2);
        assert_eq!(states[0].assignment(), &[false]);
        assert_eq!(states[1].assignment(), &[true]);
    }

    #[test]
    fn enumerate_two_vars_in_paper_order() {
        let states = enumerate_states(&reg(2));
        let printed: Vec<String> = states.iter().map(|s| s.to_string()).collect();
        assert_eq!(printed, ["00", "01", "10", "11"]);
        assert!(states.iter().enumerate().all(|(i, s)| s.index() == i));
    }

    #[test]
    fn index_is_big_endian_binary_encoding() {
        // brute enumeration of all 16 assignments of 4 variables
        let r = reg(4);
        for idx in 0..16 {
            let s = ClassicalState::from_index(idx, &r).unwrap();
            let recomputed: usize = s
                .assignment()
                .iter()
                .fold(0, |acc, &b| (acc << 1) | usize::from(b));
            assert_eq!(recomputed, idx);
        }
        let s = ClassicalState::from_index(2, &r).unwrap();
        assert_eq!(s.assignment(), &[false, false, true, false]);
    }

    #[test]
    fn tautology_indicator_is_all_ones() {
        let r = reg(1);
        let q = indicator_covector(&DecisionFunction::tautology(&r), &r).unwrap();
        assert_eq!(q.entries(), &[1.0, 1.0]);
    }

    #[test]
    fn indicator_of_explicit_support() {
        let r = reg(2);
        let f = DecisionFunction::new([1, 2]);
        let q = indicator_covector(&f, &r).unwrap();
        assert_eq!(q.entries(), &[0.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn x4_indicator_selects_eight_states() {
        let r = reg(4);
        let f = DecisionFunction::from_literals(&[4], &r).unwrap();
        assert_eq!(f.len(), 8);
        assert!(f.support().all(|idx| idx & 1 == 1));
    }

    #[test]
    fn out_of_range_support_is_rejected() {
        let r = reg(1);
        let f = DecisionFunction::new([5]);
        assert!(indicator_covector(&f, &r).is_err());
    }

    #[test]
    fn requirement_rows() {
        let r = reg(2);
        // P(1;2) = 0 selects the single state with both variables true
        let spec = ConstraintSpec::RequirementProb {
            literals: vec![1, 2],
            rhs: 0.0,
        };
        let (a, b) = spec.to_linear_equation(&r).unwrap();
        assert_eq!(a.entries(), &[0.0, 0.0, 0.0, 1.0]);
        assert_eq!(b, 0.0);

        // P(1) = P(-2)
        let spec = ConstraintSpec::requirement_equality(&[1], &[-2], &r).unwrap();
        let (a, b) = spec.to_linear_equation(&r).unwrap();
        assert_eq!(a.entries(), &[-1.0, 0.0, 0.0, 1.0]);
        assert_eq!(b, 0.0);

        // P(-1) = 1 on one variable
        let r1 = reg(1);
        let spec = ConstraintSpec::RequirementProb {
            literals: vec![-1],
            rhs: 1.0,
        };
        let (a, b) = spec.to_linear_equation(&r1).unwrap();
        assert_eq!(a.entries(), &[1.0, 0.0]);
        assert_eq!(b, 1.0);
    }

    #[test]
    fn contradictory_literals_error() {
        let r = reg(2);
        let spec = ConstraintSpec::RequirementProb {
            literals: vec![1, -1],
            rhs: 0.5,
        };
        assert!(matches!(
            spec.to_linear_equation(&r),
            Err(Error::ContradictoryLiterals(1))
        ));
    }

    #[test]
    fn universal_rows_are_normalization_only() {
        for n in 1..=3 {
            let r = reg(n);
            let rows = universal_equations(&r);
            assert_eq!(rows.len(), 1);
            assert_eq!(rows[0].0.entries(), vec![1.0; r.dim()].as_slice());
            assert_eq!(rows[0].1, 1.0);
        }
    }

    #[test]
    fn requirement_indicator_has_power_of_two_support() {
        // 2^(N - |L|) ones for every consistent literal set
        for n in 1..=4usize {
            let r = reg(n);
            for lits in [vec![1i32], vec![-1], vec![1, 2], vec![1, -2]] {
                if lits.iter().any(|l| l.unsigned_abs() as usize > n) {
                    continue;
                }
                let f = DecisionFunction::from_literals(&lits, &r).unwrap();
                assert_eq!(f.len(), 1 << (n - lits.len()));
            }
        }
    }

    #[test]
    fn marginal_summation_reproduces_partial_probabilities() {
        // eliminating partial probabilities and re-deriving them as sums of
        // complete-state probabilities is the identity, for all partial
        // requirements of up to 3 literals on up to 4 variables
        for n in 1..=4usize {
            let r = reg(n);
            let p: Vec<f64> = (0..r.dim()).map(|i| i as f64 + 1.0).collect();
            let total: f64 = p.iter().sum();
            let p: Vec<f64> = p.into_iter().map(|x| x / total).collect();
            let vars: Vec<i32> = (1..=n as i32).collect();
            let mut literal_sets: Vec<Vec<i32>> = Vec::new();
            for &i in &vars {
                for si in [i, -i] {
                    literal_sets.push(vec![si]);
                    for &j in &vars {
                        if j <= i {
                            continue;
                        }
                        for sj in [j, -j] {
                            literal_sets.push(vec![si, sj]);
                            for &k in &vars {
                                if k <= j {
                                    continue;
                                }
                                for sk in [k, -k] {
                                    literal_sets.push(vec![si, sj, sk]);
                                }
                            }
                        }
                    }
                }
            }
            for lits in literal_sets {
                let f = DecisionFunction::from_literals(&lits, &r).unwrap();
                let q = indicator_covector(&f, &r).unwrap();
                let by_dot = q.dot(&p).unwrap();
                let by_sum: f64 = f.support().map(|i| p[i]).sum();
                assert!((by_dot - by_sum).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn parse_round_trip() {
        let text = "\
# singlet-like prior
vars 2
req 1,2 = 0
req -1,-2 = 0
expect -1,-1,1,1 = 0
states {1,2} = 1
";
        let (r, specs) = parse_constraint_file(text).unwrap();
        assert_eq!(r.n_vars(), 2);
        assert_eq!(specs.len(), 4);
        let (a, b) = specs[2].to_linear_equation(&r).unwrap();
        assert_eq!(a.entries(), &[-1.0, -1.0, 1.0, 1.0]);
        assert_eq!(b, 0.0);
    }

    #[test]
    fn parse_rational_and_errors() {
        let text = "vars 1\nreq 1 = 1/2\n";
        let (_, specs) = parse_constraint_file(text).unwrap();
        match &specs[0] {
            ConstraintSpec::RequirementProb { rhs, .. } => assert_eq!(*rhs, 0.5),
            other => panic!("unexpected spec {other:?}"),
        }
        for bad in [
            "req 1 = 0\n",                 // missing header
            "vars 1\nbogus 1 = 0\n",       // unknown directive
            "vars 1\nreq 1 = 2\n",         // probability out of range
            "vars 1\nreq 1, -1 = 1/2\n",   // contradiction
            "vars 1\nexpect 1 = 0\n",      // wrong arity
            "vars 1\nstates {9} = 0\n",    // state out of range
        ] {
            let err = parse_constraint_file(bad).unwrap_err();
            assert!(matches!(err, Error::Parse { .. }), "{bad:?} -> {err:?}");
        }
    }
}
