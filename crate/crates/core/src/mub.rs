//! Mutually unbiased bases for `d = 2^N`, `N <= 3`.
//!
//! For one variable the three bases are hardcoded: the identity and the two
//! rescaled complex Hadamard matrices
//!
//! ```text
//! U2 = (1/sqrt 2) [[1, 1], [1, -1]]    U3 = (1/sqrt 2) [[1, 1], [i, -i]]
//! ```
//!
//! For two and three variables the cluster comes from the Galois-ring lift of
//! the binary field: arithmetic in `GR(4, N) = Z4[x]/(h)`, where `h` is the
//! Hensel lift of the irreducible polynomial over `GF(2^N)` — `x^2 + x + 1`
//! lifts to itself for `N = 2`, and `x^3 + x + 1` lifts to
//! `x^3 + 2x^2 + x + 3` for `N = 3`. With `T` the Teichmueller set of the
//! ring and `tr` its trace into `Z4`, the cluster is the standard basis plus,
//! for every `a` in `T`, the basis whose `b`-th vector has components
//!
//! ```text
//! <x | a; b> = i^(tr((a + 2b) x)) / sqrt(d)        (x in T)
//! ```
//!
//! Rows are indexed by the binary reduction of `x` (coefficient of `x^j` is
//! bit `j`). Every returned pair of charts passes the unbiasedness test
//! `|<w1|w2>|^2 = 1/d` at `1e-9`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::Chart;

/// Cluster of `d + 1` pairwise unbiased charts; the first is the identity.
pub fn mub_cluster(n_vars: usize) -> Result<Vec<Chart>> {
    match n_vars {
        1 => Ok(one_bit_cluster()),
        2 | 3 => galois_cluster(n_vars),
        _ => Err(Error::UnsupportedMubSize(n_vars)),
    }
}

fn one_bit_cluster() -> Vec<Chart> {
    let s = 1.0 / 2f64.sqrt();
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let u1 = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
    let u2 = DMatrix::from_row_slice(2, 2, &[c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)]);
    let u3 = DMatrix::from_row_slice(2, 2, &[c(s, 0.0), c(s, 0.0), c(0.0, s), c(0.0, -s)]);
    vec![
        Chart::new(u1, "U1").expect("unitary"),
        Chart::new(u2, "U2").expect("unitary"),
        Chart::new(u3, "U3").expect("unitary"),
    ]
}

/// An element of `GR(4, n)`: polynomial coefficients over `Z4`, low first.
type RingElem = Vec<u8>;

struct GaloisRing {
    n: usize,
    /// Monic modulus of degree `n`, coefficients over `Z4`, low first.
    modulus: Vec<u8>,
    /// Teichmueller set: zero plus the powers of the generator.
    teich: Vec<RingElem>,
    /// For each binary pattern, the index of its Teichmueller lift.
    lift_of_pattern: Vec<usize>,
}

impl GaloisRing {
    fn new(n: usize) -> Self {
        let modulus: Vec<u8> = match n {
            2 => vec![1, 1, 1],    // x^2 + x + 1
            3 => vec![3, 1, 2, 1], // x^3 + 2x^2 + x + 3
            _ => unreachable!("cluster sizes are checked by mub_cluster"),
        };
        let mut teich: Vec<RingElem> = vec![vec![0; n]];
        let mut xi = vec![0u8; n];
        xi[1] = 1;
        let mut power = {
            let mut one = vec![0u8; n];
            one[0] = 1;
            one
        };
        let order = (1 << n) - 1;
        for _ in 0..order {
            teich.push(power.clone());
            power = ring_mul(&power, &xi, &modulus, n);
        }
        let mut lift_of_pattern = vec![0usize; 1 << n];
        for (idx, t) in teich.iter().enumerate() {
            lift_of_pattern[pattern_of(t)] = idx;
        }
        GaloisRing {
            n,
            modulus,
            teich,
            lift_of_pattern,
        }
    }

    fn add(&self, a: &RingElem, b: &RingElem) -> RingElem {
        a.iter().zip(b).map(|(x, y)| (x + y) % 4).collect()
    }

    fn mul(&self, a: &RingElem, b: &RingElem) -> RingElem {
        ring_mul(a, b, &self.modulus, self.n)
    }

    fn double(&self, a: &RingElem) -> RingElem {
        a.iter().map(|x| (2 * x) % 4).collect()
    }

    /// The 2-adic decomposition `r = t0 + 2 t1` with `t0, t1` Teichmueller.
    fn two_adic(&self, r: &RingElem) -> (RingElem, RingElem) {
        let t0 = self.teich[self.lift_of_pattern[pattern_of(r)]].clone();
        let half: RingElem = r
            .iter()
            .zip(&t0)
            .map(|(x, y)| (((x + 4 - y) % 4) / 2) % 2)
            .collect();
        let t1 = self.teich[self.lift_of_pattern[pattern_of(&half)]].clone();
        (t0, t1)
    }

    /// Frobenius `t0 + 2 t1 -> t0^2 + 2 t1^2`.
    fn frobenius(&self, r: &RingElem) -> RingElem {
        let (t0, t1) = self.two_adic(r);
        self.add(&self.mul(&t0, &t0), &self.double(&self.mul(&t1, &t1)))
    }

    /// Ring trace into `Z4`: the sum of the `n` Frobenius images.
    fn trace(&self, r: &RingElem) -> u8 {
        let mut total = vec![0u8; self.n];
        let mut cur = r.clone();
        for _ in 0..self.n {
            total = self.add(&total, &cur);
            cur = self.frobenius(&cur);
        }
        debug_assert!(total[1..].iter().all(|&c| c == 0), "trace not scalar");
        total[0]
    }
}

fn ring_mul(a: &[u8], b: &[u8], modulus: &[u8], n: usize) -> RingElem {
    let mut raw = vec![0u8; 2 * n];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            raw[i + j] = (raw[i + j] + x * y) % 4;
        }
    }
    // reduce by the monic modulus
    for k in (n..2 * n).rev() {
        let c = raw[k];
        if c != 0 {
            raw[k] = 0;
            for (j, &m) in modulus.iter().enumerate().take(n) {
                let idx = k - n + j;
                raw[idx] = (raw[idx] + 4 - (c * m) % 4 % 4) % 4;
            }
        }
    }
    raw.truncate(n);
    raw
}

/// Binary pattern of an element's mod-2 reduction: coefficient `j` is bit `j`.
fn pattern_of(r: &RingElem) -> usize {
    r.iter()
        .enumerate()
        .fold(0, |acc, (j, &c)| acc | ((c as usize % 2) << j))
}

fn galois_cluster(n: usize) -> Result<Vec<Chart>> {
    let ring = GaloisRing::new(n);
    let d = 1 << n;
    let i_powers = [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, -1.0),
    ];
    let scale = 1.0 / (d as f64).sqrt();
    let mut charts = vec![Chart::identity(d)];
    for (ai, a) in ring.teich.iter().enumerate() {
        let mut u = DMatrix::from_element(d, d, Complex64::new(0.0, 0.0));
        for (col, b) in ring.teich.iter().enumerate() {
            let shift = ring.add(a, &ring.double(b));
            for x in ring.teich.iter() {
                let row = pattern_of(x);
                let phase = ring.trace(&ring.mul(&shift, x));
                u[(row, col)] = i_powers[phase as usize] * scale;
            }
        }
        charts.push(Chart::new(u, format!("mub{}", ai + 1))?);
    }
    Ok(charts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn one_bit_cluster_matches_the_reference_matrices() {
        let cluster = mub_cluster(1).unwrap();
        assert_eq!(cluster.len(), 3);
        let u3 = cluster[2].unitary();
        assert_abs_diff_eq!(u3[(1, 0)].im, 1.0 / 2f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(u3[(1, 1)].im, -1.0 / 2f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn generator_order_in_the_lifted_ring() {
        // xi^(2^n - 1) = 1 confirms the modulus is a basic irreducible lift
        for n in [2usize, 3] {
            let ring = GaloisRing::new(n);
            let one = &ring.teich[1];
            let order = (1usize << n) - 1;
            let mut p = one.clone();
            let xi = &ring.teich[2];
            for _ in 0..order {
                p = ring.mul(&p, xi);
            }
            assert_eq!(&p, one, "n = {n}");
        }
    }

    #[test]
    fn clusters_are_pairwise_unbiased() {
        for n in 1..=3usize {
            let d = 1 << n;
            let cluster = mub_cluster(n).unwrap();
            assert_eq!(cluster.len(), d + 1);
            for i in 0..cluster.len() {
                for j in i + 1..cluster.len() {
                    let gram = cluster[i].unitary().adjoint() * cluster[j].unitary();
                    for entry in gram.iter() {
                        assert_abs_diff_eq!(
                            entry.norm_sqr(),
                            1.0 / d as f64,
                            epsilon = 1e-9
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn unsupported_sizes_are_rejected() {
        assert!(matches!(mub_cluster(4), Err(Error::UnsupportedMubSize(4))));
    }
}
