//! Brute-force density matrices for checking the Bell-weight algebra.
//!
//! Nothing here goes through [`crate::channel`]: channels are applied from
//! their operator definitions, swaps are explicit Bell projections over the
//! full joint state of up to four pairs (eight qubits), and outcomes are
//! averaged after their Pauli corrections.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::channel::{BellDiagonalState, Channel};
use crate::{Error, Result};

const MAX_PAIRS: usize = 4;
const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

type Mat2 = [[Complex64; 2]; 2];

const PAULI_Z: Mat2 = [[ONE, ZERO], [ZERO, Complex64::new(-1.0, 0.0)]];
const PAULI_X: Mat2 = [[ZERO, ONE], [ONE, ZERO]];
const PAULI_Y: Mat2 = [[ZERO, Complex64::new(0.0, -1.0)], [I, ZERO]];

/// Bell vectors over `|ab>`, index `2a + b`, in the order Φ+, Φ−, Ψ+, Ψ−.
fn bell_vectors() -> [[Complex64; 4]; 4] {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    [
        [h, ZERO, ZERO, h],
        [h, ZERO, ZERO, -h],
        [ZERO, h, h, ZERO],
        [ZERO, h, -h, ZERO],
    ]
}

/// Row-major `2^q x 2^q` complex matrix. Qubit 0 is the most significant bit.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    qubits: usize,
    data: Vec<Complex64>,
}

impl DensityMatrix {
    pub fn from_matrix(qubits: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != 1 << (2 * qubits) {
            return Err(Error::InvalidDensityMatrix("dimension mismatch"));
        }
        Ok(DensityMatrix { qubits, data })
    }

    pub fn from_bell_diagonal(s: &BellDiagonalState) -> Self {
        let bell = bell_vectors();
        let mut data = vec![ZERO; 16];
        for (w, v) in s.weights().iter().zip(bell.iter()) {
            for r in 0..4 {
                for c in 0..4 {
                    data[r * 4 + c] += v[r] * v[c].conj() * *w;
                }
            }
        }
        DensityMatrix { qubits: 2, data }
    }

    pub fn phi_plus() -> Self {
        Self::from_bell_diagonal(&BellDiagonalState::phi_plus())
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.qubits
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim() + col]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    /// Hermitian, unit trace and positive semidefinite, within tolerance.
    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        for r in 0..d {
            for c in r..d {
                let diff = self.get(r, c) - self.get(c, r).conj();
                if libm::fabs(diff.re) > HERMITIAN_TOL || libm::fabs(diff.im) > HERMITIAN_TOL {
                    return Err(Error::InvalidDensityMatrix("not Hermitian"));
                }
            }
        }
        let tr = self.trace();
        if libm::fabs(tr.re - 1.0) > TRACE_TOL || libm::fabs(tr.im) > TRACE_TOL {
            return Err(Error::InvalidDensityMatrix("trace is not 1"));
        }
        if min_eigenvalue_hermitian(&self.data, d) < -PSD_TOL {
            return Err(Error::InvalidDensityMatrix("not positive semidefinite"));
        }
        Ok(())
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let (da, db) = (self.dim(), other.dim());
        let d = da * db;
        let mut data = vec![ZERO; d * d];
        for r1 in 0..da {
            for c1 in 0..da {
                let a = self.get(r1, c1);
                if a == ZERO {
                    continue;
                }
                for r2 in 0..db {
                    for c2 in 0..db {
                        data[(r1 * db + r2) * d + c1 * db + c2] = a * other.get(r2, c2);
                    }
                }
            }
        }
        DensityMatrix {
            qubits: self.qubits + other.qubits,
            data,
        }
    }

    fn bit(&self, qubit: usize) -> usize {
        1 << (self.qubits - 1 - qubit)
    }

    /// `U ρ U†` with `U` acting on `qubit`.
    pub fn conjugate(&self, qubit: usize, u: &Mat2) -> Self {
        let d = self.dim();
        let mask = self.bit(qubit);
        let mut data = vec![ZERO; d * d];
        for r in 0..d {
            let (r0, rq) = (r & !mask, usize::from(r & mask != 0));
            for c in 0..d {
                let (c0, cq) = (c & !mask, usize::from(c & mask != 0));
                let mut acc = ZERO;
                for (a, &ua) in u[rq].iter().enumerate() {
                    if ua == ZERO {
                        continue;
                    }
                    for (b, &ub) in u[cq].iter().enumerate() {
                        if ub == ZERO {
                            continue;
                        }
                        let rr = r0 | if a == 1 { mask } else { 0 };
                        let cc = c0 | if b == 1 { mask } else { 0 };
                        acc += ua * self.data[rr * d + cc] * ub.conj();
                    }
                }
                data[r * d + c] = acc;
            }
        }
        DensityMatrix {
            qubits: self.qubits,
            data,
        }
    }

    /// `ρ ↦ a ρ + (1 − a) (1/2 ⊗ Tr_q ρ)` on `qubit`.
    pub fn depolarize(&self, qubit: usize, a: f64) -> Self {
        let d = self.dim();
        let mask = self.bit(qubit);
        let mut data = vec![ZERO; d * d];
        for r in 0..d {
            for c in 0..d {
                let mut v = self.data[r * d + c] * a;
                if (r & mask) == (c & mask) {
                    let (r0, c0) = (r & !mask, c & !mask);
                    let reduced = self.data[r0 * d + c0] + self.data[(r0 | mask) * d + (c0 | mask)];
                    v += reduced * ((1.0 - a) / 2.0);
                }
                data[r * d + c] = v;
            }
        }
        DensityMatrix {
            qubits: self.qubits,
            data,
        }
    }

    /// `ρ ↦ (1 + c)/2 ρ + (1 − c)/2 Z ρ Z` on `qubit`.
    pub fn dephase(&self, qubit: usize, c: f64) -> Self {
        let flipped = self.conjugate(qubit, &PAULI_Z);
        let data = self
            .data
            .iter()
            .zip(flipped.data.iter())
            .map(|(x, z)| *x * ((1.0 + c) / 2.0) + *z * ((1.0 - c) / 2.0))
            .collect();
        DensityMatrix {
            qubits: self.qubits,
            data,
        }
    }

    pub fn apply_channel(&self, qubit: usize, ch: Channel) -> Self {
        match ch {
            Channel::TimeDephasing { tau } => self.dephase(qubit, libm::exp(-tau)),
            Channel::TimeDepolarizing { tau } => self.depolarize(qubit, libm::exp(-tau)),
            Channel::DiscreteDepolarizing { alpha } => self.depolarize(qubit, alpha),
        }
    }

    /// Project qubits `a` and `b` onto each Bell state, trace them out,
    /// apply the matching Pauli to `target` and sum over outcomes.
    fn bell_measure(&self, a: usize, b: usize, target: usize) -> Self {
        let d = self.dim();
        let (ma, mb) = (self.bit(a), self.bit(b));
        let remaining = self.qubits - 2;
        let dr = 1 << remaining;
        // full index of remaining index `r` with measured bits (x_a, x_b) inserted
        let expand = |r: usize, xa: usize, xb: usize| -> usize {
            let mut full = 0;
            let mut src = remaining;
            for q in 0..self.qubits {
                let m = self.bit(q);
                let bit = if m == ma {
                    xa
                } else if m == mb {
                    xb
                } else {
                    src -= 1;
                    (r >> src) & 1
                };
                if bit == 1 {
                    full |= m;
                }
            }
            full
        };
        let mut index = vec![0usize; dr * 4];
        for r in 0..dr {
            for x in 0..4 {
                index[r * 4 + x] = expand(r, x >> 1, x & 1);
            }
        }
        let target_after = target - usize::from(a < target) - usize::from(b < target);
        let corrections: [Option<&Mat2>; 4] =
            [None, Some(&PAULI_Z), Some(&PAULI_X), Some(&PAULI_Y)];
        let mut total = vec![ZERO; dr * dr];
        for (m, v) in bell_vectors().iter().enumerate() {
            let mut sigma = vec![ZERO; dr * dr];
            for r in 0..dr {
                for c in 0..dr {
                    let mut acc = ZERO;
                    for x in 0..4 {
                        if v[x] == ZERO {
                            continue;
                        }
                        for y in 0..4 {
                            if v[y] == ZERO {
                                continue;
                            }
                            acc += v[x].conj()
                                * self.data[index[r * 4 + x] * d + index[c * 4 + y]]
                                * v[y];
                        }
                    }
                    sigma[r * dr + c] = acc;
                }
            }
            let mut sigma = DensityMatrix {
                qubits: remaining,
                data: sigma,
            };
            if let Some(p) = corrections[m] {
                sigma = sigma.conjugate(target_after, p);
            }
            for (t, s) in total.iter_mut().zip(sigma.data.iter()) {
                *t += *s;
            }
        }
        DensityMatrix {
            qubits: remaining,
            data: total,
        }
    }

    /// Overlap `⟨B_m|ρ|B_m⟩` with each Bell state of a two-qubit matrix.
    pub fn bell_weights(&self) -> [f64; 4] {
        assert_eq!(self.qubits, 2, "bell_weights needs a two-qubit state");
        let mut out = [0.0; 4];
        for (slot, v) in out.iter_mut().zip(bell_vectors().iter()) {
            let mut acc = ZERO;
            for r in 0..4 {
                for c in 0..4 {
                    acc += v[r].conj() * self.get(r, c) * v[c];
                }
            }
            *slot = acc.re;
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.qubits, other.qubits);
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| {
                let d = *a - *b;
                libm::fabs(d.re).max(libm::fabs(d.im))
            })
            .fold(0.0, f64::max)
    }
}

/// Swap `pairs` left to right; `alphas[j]` is the measurement noise at the
/// junction between pair `j` and pair `j + 1`.
pub fn oracle_dense_bsm(pairs: &[DensityMatrix], alphas: &[f64]) -> Result<DensityMatrix> {
    let order: Vec<usize> = (0..pairs.len().saturating_sub(1)).collect();
    oracle_dense_bsm_ordered(pairs, alphas, &order)
}

/// As [`oracle_dense_bsm`], performing the junction swaps in `order`.
///
/// Each swap measures the two inner qubits, corrects and depolarizes the
/// rightmost qubit of the merged segment.
pub fn oracle_dense_bsm_ordered(
    pairs: &[DensityMatrix],
    alphas: &[f64],
    order: &[usize],
) -> Result<DensityMatrix> {
    let k = pairs.len();
    if !(2..=MAX_PAIRS).contains(&k) {
        return Err(Error::InvalidParameter {
            field: "oracle.pairs",
            reason: "between 2 and 4 pairs supported",
        });
    }
    if alphas.len() != k - 1 || order.len() != k - 1 {
        return Err(Error::InvalidParameter {
            field: "oracle.alphas",
            reason: "need one alpha and one order entry per junction",
        });
    }
    let mut seen = vec![false; k - 1];
    for &j in order {
        if j >= k - 1 || core::mem::replace(&mut seen[j], true) {
            return Err(Error::InvalidParameter {
                field: "oracle.order",
                reason: "must be a permutation of the junctions",
            });
        }
    }
    if alphas.iter().any(|a| !(0.0..=1.0).contains(a)) {
        return Err(Error::InvalidParameter {
            field: "oracle.alphas",
            reason: "must be in [0, 1]",
        });
    }
    for p in pairs {
        if p.qubits != 2 {
            return Err(Error::InvalidDensityMatrix(
                "each pair must be a two-qubit state",
            ));
        }
        p.validate()?;
    }

    let mut joint = pairs[0].clone();
    for p in &pairs[1..] {
        joint = joint.tensor(p);
    }
    // live[i] = original qubit label at current position i
    let mut live: Vec<usize> = (0..2 * k).collect();
    // segment ends, indexed by the pair that owns the segment
    let mut owner: Vec<usize> = (0..k).collect();
    let mut ends: Vec<(usize, usize)> = (0..k).map(|j| (2 * j, 2 * j + 1)).collect();
    let position =
        |live: &[usize], label: usize| live.iter().position(|&l| l == label).expect("live qubit");

    for &j in order {
        let (left, right) = (owner[j], owner[j + 1]);
        let (outer_left, inner_left) = ends[left];
        let (inner_right, outer_right) = ends[right];
        let a = position(&live, inner_left);
        let b = position(&live, inner_right);
        let t = position(&live, outer_right);
        joint = joint.bell_measure(a, b, t);
        live.retain(|&l| l != inner_left && l != inner_right);
        let t = position(&live, outer_right);
        joint = joint.depolarize(t, alphas[j]);
        ends[left] = (outer_left, outer_right);
        for o in owner.iter_mut().filter(|o| **o == right) {
            *o = left;
        }
    }
    Ok(joint)
}

/// Smallest eigenvalue of a Hermitian `d x d` matrix via cyclic Jacobi on
/// its real symmetric `2d x 2d` embedding `[[Re, -Im], [Im, Re]]`.
fn min_eigenvalue_hermitian(data: &[Complex64], d: usize) -> f64 {
    let n = 2 * d;
    let mut a = vec![0.0f64; n * n];
    for r in 0..d {
        for c in 0..d {
            let z = data[r * d + c];
            a[r * n + c] = z.re;
            a[(r + d) * n + c + d] = z.re;
            a[r * n + c + d] = -z.im;
            a[(r + d) * n + c] = z.im;
        }
    }
    // symmetrize away rounding in the Hermitian check tolerance
    for r in 0..n {
        for c in r + 1..n {
            let m = 0.5 * (a[r * n + c] + a[c * n + r]);
            a[r * n + c] = m;
            a[c * n + r] = m;
        }
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|r| (0..n).filter(move |&c| c != r).map(move |c| (r, c)))
            .map(|(r, c)| a[r * n + c] * a[r * n + c])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if libm::fabs(apq) < 1e-300 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + libm::sqrt(1.0 + theta * theta))
                } else {
                    -1.0 / (-theta + libm::sqrt(1.0 + theta * theta))
                };
                let cs = 1.0 / libm::sqrt(1.0 + t * t);
                let sn = t * cs;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = cs * akp - sn * akq;
                    a[k * n + q] = sn * akp + cs * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = cs * apk - sn * aqk;
                    a[q * n + k] = sn * apk + cs * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i * n + i]).fold(f64::INFINITY, f64::min)
}
