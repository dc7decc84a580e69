//! Pair-partition combinatorics and the orthogonal Weingarten assembly.
//!
//! This module is the exact, combinatorial verification engine. Everything
//! is computed in arbitrary-precision rational arithmetic: pairings of
//! `{1..2q}` and their join/coset types, orthogonal Weingarten functions up
//! to order 4, Haar-expectation coefficients of orthogonal monomials, the
//! elementary lemma systems solved with a symbolic dimension variable, and
//! the centered cross-inertia moments assembled from trivariate type counts.
//! Floating point enters only when contracting against `f64` spectra.

mod symbolic;

use std::collections::BTreeMap;
use std::fmt;

pub use symbolic::{Poly, RatFn, Rational};

use num::{BigInt, One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::spectra::NontrivialSpectrum;

pub(crate) fn rat(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

fn rat_pow(base: &Rational, exp: usize) -> Rational {
    num::pow::pow(base.clone(), exp)
}

/// Perfect matching of `{0, .., 2q-1}` in canonical form: each pair stored
/// as `(s, t)` with `s < t`, pairs sorted by first element.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pairing {
    pairs: Vec<(usize, usize)>,
}

impl Pairing {
    /// Validates that the pairs partition `{0, .., 2q-1}` and canonicalizes.
    pub fn new(pairs: Vec<(usize, usize)>) -> Result<Self> {
        let q = pairs.len();
        let mut seen = vec![false; 2 * q];
        for &(a, b) in &pairs {
            if a >= 2 * q || b >= 2 * q || a == b {
                return Err(Error::InvalidArgument(format!(
                    "pair ({a},{b}) out of range for q = {q}"
                )));
            }
            if seen[a] || seen[b] {
                return Err(Error::InvalidArgument(format!(
                    "element repeated in pairing at ({a},{b})"
                )));
            }
            seen[a] = true;
            seen[b] = true;
        }
        let mut pairs: Vec<(usize, usize)> = pairs
            .into_iter()
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        pairs.sort_unstable();
        Ok(Self { pairs })
    }

    /// The reference pairing `(01|23|45|...)`.
    pub fn reference(q: usize) -> Self {
        Self {
            pairs: (0..q).map(|r| (2 * r, 2 * r + 1)).collect(),
        }
    }

    pub fn q(&self) -> usize {
        self.pairs.len()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Whether the word is constant on every block of the pairing.
    pub fn is_compatible(&self, word: &[usize]) -> bool {
        debug_assert_eq!(word.len(), 2 * self.q());
        self.pairs.iter().all(|&(s, t)| word[s] == word[t])
    }
}

impl fmt::Display for Pairing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let blocks: Vec<String> = self
            .pairs
            .iter()
            .map(|&(a, b)| format!("{},{}", a + 1, b + 1))
            .collect();
        write!(f, "({})", blocks.join("|"))
    }
}

/// All `(2q-1)!!` pairings of `{0, .., 2q-1}`, canonical and duplicate-free.
pub fn enumerate_pairings(q: usize) -> Result<Vec<Pairing>> {
    if !(1..=5).contains(&q) {
        return Err(Error::InvalidArgument(format!(
            "pairing enumeration supports 1 <= q <= 5, got {q}"
        )));
    }
    fn recurse(free: &[usize], current: &mut Vec<(usize, usize)>, out: &mut Vec<Pairing>) {
        if free.is_empty() {
            out.push(Pairing {
                pairs: current.clone(),
            });
            return;
        }
        let first = free[0];
        for i in 1..free.len() {
            let partner = free[i];
            let mut rest: Vec<usize> = free[1..].to_vec();
            rest.remove(i - 1);
            current.push((first, partner));
            recurse(&rest, current, out);
            current.pop();
        }
    }
    let mut out = Vec::new();
    let all: Vec<usize> = (0..2 * q).collect();
    recurse(&all, &mut Vec::with_capacity(q), &mut out);
    Ok(out)
}

/// Integer partition of `q`: nonincreasing positive parts.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PartitionType {
    parts: Vec<usize>,
}

impl PartitionType {
    pub fn new(mut parts: Vec<usize>) -> Result<Self> {
        if parts.is_empty() || parts.contains(&0) {
            return Err(Error::InvalidArgument("parts must be positive".into()));
        }
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Ok(Self { parts })
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    /// The integer being partitioned.
    pub fn q(&self) -> usize {
        self.parts.iter().sum()
    }

    /// Number of parts, written `N` in join-type exponents.
    pub fn block_count(&self) -> usize {
        self.parts.len()
    }
}

impl fmt::Display for PartitionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.parts.iter().map(|p| p.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// All integer partitions of `q`, ascending in lexicographic order, e.g.
/// `(1,1,1,1) < (2,1,1) < (2,2) < (3,1) < (4)`.
pub fn partitions_of(q: usize) -> Vec<PartitionType> {
    fn recurse(remaining: usize, max: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if remaining == 0 {
            out.push(current.clone());
            return;
        }
        for part in (1..=remaining.min(max)).rev() {
            current.push(part);
            recurse(remaining - part, part, current, out);
            current.pop();
        }
    }
    let mut raw = Vec::new();
    recurse(q, q, &mut Vec::new(), &mut raw);
    let mut out: Vec<PartitionType> = raw
        .into_iter()
        .map(|parts| PartitionType { parts })
        .collect();
    out.sort();
    out
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(len: usize) -> Self {
        Self {
            parent: (0..len).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra != rb {
            self.parent[ra] = rb;
        }
    }
}

/// Type of the join `a v b`: the finest partition coarser than both pairings
/// has blocks of even sizes `2 l_1 >= 2 l_2 >= ...`; returns `(l_1, l_2, ..)`.
pub fn join_type(a: &Pairing, b: &Pairing) -> Result<PartitionType> {
    if a.q() != b.q() {
        return Err(Error::DimensionMismatch {
            expected: a.q(),
            found: b.q(),
        });
    }
    let m = 2 * a.q();
    let mut uf = UnionFind::new(m);
    for &(s, t) in a.pairs().iter().chain(b.pairs()) {
        uf.union(s, t);
    }
    let mut sizes: BTreeMap<usize, usize> = BTreeMap::new();
    for x in 0..m {
        *sizes.entry(uf.find(x)).or_insert(0) += 1;
    }
    let mut parts: Vec<usize> = sizes.values().map(|s| s / 2).collect();
    parts.sort_unstable_by(|x, y| y.cmp(x));
    Ok(PartitionType { parts })
}

/// Coset type of a pairing: type of its join with the reference pairing.
pub fn coset_type(a: &Pairing) -> PartitionType {
    join_type(a, &Pairing::reference(a.q())).expect("same q by construction")
}

/// Joint distribution of `(type(s v t), type(s v s0), type(t v s0))` over all
/// ordered pairs of pairings `(s, t)`.
#[derive(Debug, Clone)]
pub struct TrivariateCountTable {
    q: usize,
    counts: BTreeMap<(PartitionType, PartitionType, PartitionType), u64>,
}

impl TrivariateCountTable {
    pub fn q(&self) -> usize {
        self.q
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn get(
        &self,
        join: &PartitionType,
        coset_s: &PartitionType,
        coset_t: &PartitionType,
    ) -> u64 {
        self.counts
            .get(&(join.clone(), coset_s.clone(), coset_t.clone()))
            .copied()
            .unwrap_or(0)
    }

    pub fn iter(
        &self,
    ) -> impl Iterator<Item = (&(PartitionType, PartitionType, PartitionType), &u64)> {
        self.counts.iter()
    }
}

fn counts_table(q: usize) -> Result<TrivariateCountTable> {
    let pairings = enumerate_pairings(q)?;
    let cosets: Vec<PartitionType> = pairings.iter().map(coset_type).collect();
    let mut counts = BTreeMap::new();
    for (i, s) in pairings.iter().enumerate() {
        for (j, t) in pairings.iter().enumerate() {
            let key = (join_type(s, t)?, cosets[i].clone(), cosets[j].clone());
            *counts.entry(key).or_insert(0u64) += 1;
        }
    }
    Ok(TrivariateCountTable { q, counts })
}

/// Regenerates the trivariate type-count tables by exhaustive enumeration.
pub fn trivariate_counts(q: usize) -> Result<TrivariateCountTable> {
    if !(3..=4).contains(&q) {
        return Err(Error::InvalidArgument(format!(
            "trivariate tables are defined for q in {{3, 4}}, got {q}"
        )));
    }
    counts_table(q)
}

fn bigint_product(factors: &[i64]) -> BigInt {
    factors.iter().map(|f| BigInt::from(*f)).product()
}

fn kappa(n: i64) -> Rational {
    Rational::new(BigInt::one(), bigint_product(&[n - 2, n - 1, n + 1]))
}

fn kappa_hat(n: i64) -> Rational {
    Rational::new(
        BigInt::one(),
        bigint_product(&[n - 3, n - 2, n - 1, n + 1, n + 3]),
    )
}

fn phi(n: i64) -> Rational {
    Rational::new(
        BigInt::one(),
        bigint_product(&[n - 4, n - 3, n - 2, n - 1, n, n + 1, n + 3, n + 5]),
    )
}

/// Orthogonal Weingarten function of a join type, exact in `n` (dimension of
/// the underlying orthogonal group is `d = n - 1`). Supported up to order 4;
/// `n >= q + 1` keeps every denominator factor positive.
pub fn weingarten_value(t: &PartitionType, n: usize) -> Result<Rational> {
    let q = t.q();
    if q > 4 {
        return Err(Error::UnsupportedOrder { q });
    }
    if n < q + 1 {
        return Err(Error::SmallN {
            n,
            min: q + 1,
            what: "Weingarten function denominator",
        });
    }
    let n = n as i64;
    let value = match t.parts() {
        [1] => Rational::new(BigInt::one(), BigInt::from(n - 1)),
        [1, 1] => rat(n) * kappa(n),
        [2] => -kappa(n),
        [1, 1, 1] => rat(n * n + n - 4) * kappa_hat(n),
        [2, 1] => rat(-(n + 1)) * kappa_hat(n),
        [3] => rat(2) * kappa_hat(n),
        [1, 1, 1, 1] => rat((n - 3) * (n + 2) * (n * n + 4 * n - 4)) * phi(n),
        [2, 1, 1] => rat(-n * n * n - 3 * n * n + 6 * n + 4) * phi(n),
        [2, 2] => rat(n * n + 3 * n + 14) * phi(n),
        [3, 1] => rat((n - 1) * (2 * n + 6)) * phi(n),
        [4] => rat(-(5 * n + 1)) * phi(n),
        _ => unreachable!("all partitions of q <= 4 are covered"),
    };
    Ok(value)
}

/// Haar expectation of the orthogonal monomial `prod_k t[sub_k, sup_k]` over
/// the group of dimension `n - 1`, via the Weingarten expansion: the sum of
/// `Wg(type(s v t))` over pairings `s` compatible with `sup` and `t`
/// compatible with `sub`. Index values are 0-based in `[0, n-1)`.
pub fn orthogonal_coefficient(sub: &[usize], sup: &[usize], n: usize) -> Result<Rational> {
    if sub.len() != sup.len() {
        return Err(Error::DimensionMismatch {
            expected: sub.len(),
            found: sup.len(),
        });
    }
    if sub.is_empty() || !sub.len().is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "multi-index length must be a positive even number, got {}",
            sub.len()
        )));
    }
    let q = sub.len() / 2;
    if q > 4 {
        return Err(Error::UnsupportedOrder { q });
    }
    if let Some(bad) = sub.iter().chain(sup).find(|v| **v + 1 >= n) {
        return Err(Error::InvalidArgument(format!(
            "index value {bad} out of range for dimension {}",
            n - 1
        )));
    }
    let pairings = enumerate_pairings(q)?;
    let sup_compatible: Vec<&Pairing> = pairings.iter().filter(|p| p.is_compatible(sup)).collect();
    let sub_compatible: Vec<&Pairing> = pairings.iter().filter(|p| p.is_compatible(sub)).collect();
    let mut wg_cache: BTreeMap<PartitionType, Rational> = BTreeMap::new();
    let mut acc = Rational::zero();
    for s in &sup_compatible {
        for t in &sub_compatible {
            let join = join_type(s, t)?;
            if !wg_cache.contains_key(&join) {
                let value = weingarten_value(&join, n)?;
                wg_cache.insert(join.clone(), value);
            }
            acc += &wg_cache[&join];
        }
    }
    Ok(acc)
}

/// Index constants into [`ElementarySolution::order2`]: the four order-2
/// orthogonal coefficients, by occupancy pattern of `(sub; sup)`.
pub mod order2 {
    /// `(aaaa; XXXX)` - one repeated subscript, one repeated superscript.
    pub const E: usize = 0;
    /// `(aacc; XXXX)` - two subscript pairs, one repeated superscript.
    pub const F: usize = 1;
    /// `(aacc; XXYY)` - pairs aligned with the reference blocks.
    pub const G: usize = 2;
    /// `(aacc; XYXY)` - pairs crossing the reference blocks.
    pub const H: usize = 3;
}

/// Index constants into [`ElementarySolution::order3`]: the eleven order-3
/// orthogonal coefficients, by occupancy pattern of `(sub; sup)`.
pub mod order3 {
    /// `(aaaaaa; XXXXXX)`
    pub const L: usize = 0;
    /// `(aaaacc; XXXXXX)`
    pub const M: usize = 1;
    /// `(aaccee; XXXXXX)`
    pub const N: usize = 2;
    /// `(aaaacc; XXXXYY)`
    pub const P: usize = 3;
    /// `(aaccaa; XXXXYY)`
    pub const Q: usize = 4;
    /// `(aaacac; XXXXYY)`
    pub const R: usize = 5;
    /// `(aaccee; XXXXYY)`
    pub const S: usize = 6;
    /// `(aceeac; XXXXYY)`
    pub const T: usize = 7;
    /// `(aaccee; XXYYZZ)`
    pub const U: usize = 8;
    /// `(acacee; XXYYZZ)`
    pub const V: usize = 9;
    /// `(aeceac; XXYYZZ)`
    pub const W: usize = 10;
}

/// Order-2 and order-3 orthogonal coefficients as exact rational functions
/// of the symbolic dimension variable.
#[derive(Debug, Clone)]
pub struct ElementarySolution {
    pub order2: [RatFn; 4],
    pub order3: [RatFn; 11],
}

/// Solves the invariance/orthogonality relation systems for the order-2 and
/// order-3 orthogonal coefficients by Gauss-Jordan elimination over the
/// field of rational functions in the dimension variable. The order-3 system
/// is overdetermined (15 relations, 11 unknowns); consistency is checked.
pub fn solve_elementary_systems() -> ElementarySolution {
    let n = || RatFn::from_poly(Poly::var());
    let c = RatFn::from_int;
    let zero = RatFn::zero;
    let n_minus = |k: i64| RatFn::from_poly(Poly::linear(-k, 1));

    // Unknowns [E, F, G, H]:
    //   F = G + 2H, E = 3F, (n-2)G + F = 1/(n-1), (n-2)H + F = 0.
    let inv_n1 = RatFn::inv_poly(Poly::linear(-1, 1));
    let rows2 = vec![
        vec![zero(), c(1), c(-1), c(-2), zero()],
        vec![c(1), c(-3), zero(), zero(), zero()],
        vec![zero(), c(1), n_minus(2), zero(), inv_n1],
        vec![zero(), c(1), zero(), n_minus(2), zero()],
    ];
    let sol2 = symbolic::solve_linear(rows2, 4).expect("order-2 system is consistent");
    let [e, f, g, h]: [RatFn; 4] = sol2.try_into().expect("four unknowns");

    // Unknowns [L, M, N, P, Q, R, S, T, U, V, W] with E, F, G, H known.
    let mut rows3: Vec<Vec<RatFn>> = Vec::new();
    let mut row = |coeffs: Vec<(usize, RatFn)>, rhs: RatFn| {
        let mut r = vec![RatFn::zero(); 12];
        for (idx, value) in coeffs {
            r[idx] = value;
        }
        r[11] = rhs;
        rows3.push(r);
    };
    use order3::{L, M, N, P, Q, R, S, T, U, V, W};
    row(vec![(S, c(1)), (U, c(-1)), (V, c(-2))], zero());
    row(vec![(T, c(1)), (V, c(-1)), (W, c(-2))], zero());
    row(vec![(M, c(1)), (N, c(-3))], zero());
    row(vec![(P, c(1)), (S, c(-3))], zero());
    row(vec![(R, c(1)), (T, c(-3))], zero());
    row(vec![(M, n_minus(2)), (L, c(1))], e.clone());
    row(vec![(P, n_minus(2)), (M, c(1))], e.clone());
    row(vec![(N, n_minus(3)), (M, c(2))], f.clone());
    row(vec![(S, n_minus(3)), (Q, c(2))], f.clone());
    row(vec![(Q, n_minus(2)), (M, c(1))], f.clone());
    row(vec![(U, n_minus(3)), (S, c(2))], g.clone());
    row(vec![(V, n_minus(3)), (T, c(2))], h.clone());
    row(vec![(R, n_minus(2)), (M, c(1))], zero());
    row(vec![(T, n_minus(2)), (N, c(1))], zero());
    row(vec![(W, n_minus(3)), (T, c(2))], zero());
    let _ = n; // the variable appears through the linear factors above
    let sol3 = symbolic::solve_linear(rows3, 11).expect("order-3 system is consistent");
    ElementarySolution {
        order2: [e, f, g, h],
        order3: sol3.try_into().expect("eleven unknowns"),
    }
}

/// Kronecker-delta aggregates of the Greek 6-tuple `(a,b,c,d,e,z)` indexing
/// the triple product `P_ab P_cd P_ez`: coincidence counts within the row
/// indices `(a,c,e)` and the column indices `(b,d,z)`, the paired-coincidence
/// count, and the all-equal flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DeltaAggregates {
    /// Number of equal pairs among the row indices, in {0, 1, 3}.
    pub sigma_sum: u8,
    /// Number of equal pairs among the column indices, in {0, 1, 3}.
    pub tau_sum: u8,
    /// Paired coincidences across the three factors, in {0, .., 3}.
    pub omega: u8,
    /// All three row indices equal (implies `sigma_sum == 3`).
    pub phi: bool,
    /// All three column indices equal (implies `tau_sum == 3`).
    pub psi: bool,
}

impl DeltaAggregates {
    pub fn from_indices(indices: &[usize; 6]) -> Self {
        let [a, b, c, d, e, z] = *indices;
        let d_ac = u8::from(a == c);
        let d_ae = u8::from(a == e);
        let d_ce = u8::from(c == e);
        let d_bd = u8::from(b == d);
        let d_bz = u8::from(b == z);
        let d_dz = u8::from(d == z);
        Self {
            sigma_sum: d_ac + d_ae + d_ce,
            tau_sum: d_bd + d_bz + d_dz,
            omega: d_ac * d_bd + d_ae * d_bz + d_ce * d_dz,
            phi: d_ac + d_ae + d_ce == 3,
            psi: d_bd + d_bz + d_dz == 3,
        }
    }
}

fn order2_value(row_equal: bool, col_equal: bool, n: i64) -> Rational {
    let mut bracket = n;
    if row_equal {
        bracket -= 2;
    }
    if col_equal {
        bracket -= 2;
    }
    if row_equal && col_equal {
        bracket += 2 * (n - 1);
    }
    rat(bracket) * kappa(n)
}

fn order3_value(agg: &DeltaAggregates, n: i64) -> Rational {
    let sigma = i64::from(agg.sigma_sum);
    let tau = i64::from(agg.tau_sum);
    let omega = i64::from(agg.omega);
    let phi_f = i64::from(agg.phi);
    let psi_f = i64::from(agg.psi);
    let bracket =
        (n * n + n - 4) - 2 * (n + 1) * (sigma + tau) + 16 * (phi_f + psi_f) + 8 * sigma * tau
            - 8 * (n - 1) * (sigma * psi_f + tau * phi_f)
            + 8 * (n - 1) * (n - 1) * phi_f * psi_f
            + 2 * (n - 3) * (n + 3) * omega;
    rat(bracket) * kappa_hat(n)
}

/// Exact Haar expectation of products of overlap-matrix entries:
/// `E(P_ab)`, `E(P_ab P_cd)` or `E(P_ab P_cd P_ez)` depending on whether 2,
/// 4 or 6 Greek indices are given (0-based values in `[0, n-1)`).
pub fn expected_p_products(indices: &[usize], n: usize) -> Result<Rational> {
    let order = match indices.len() {
        2 => 1,
        4 => 2,
        6 => 3,
        len => {
            return Err(Error::InvalidArgument(format!(
                "expected 2, 4 or 6 Greek indices, got {len}"
            )))
        }
    };
    let min_n = order + 1;
    if n < min_n {
        return Err(Error::SmallN {
            n,
            min: min_n,
            what: "expected P-product denominator",
        });
    }
    if let Some(bad) = indices.iter().find(|v| **v + 1 >= n) {
        return Err(Error::InvalidArgument(format!(
            "index value {bad} out of range for dimension {}",
            n - 1
        )));
    }
    let n_i = n as i64;
    match order {
        1 => Ok(Rational::new(BigInt::one(), BigInt::from(n_i - 1))),
        2 => Ok(order2_value(
            indices[0] == indices[2],
            indices[1] == indices[3],
            n_i,
        )),
        _ => {
            let fixed: [usize; 6] = indices.try_into().expect("length checked");
            Ok(order3_value(&DeltaAggregates::from_indices(&fixed), n_i))
        }
    }
}

fn centered_moments_rational(values: &[Rational], up_to: usize) -> Vec<Rational> {
    let dim = rat(values.len() as i64);
    let mean = values.iter().fold(Rational::zero(), |acc, v| acc + v) / &dim;
    let mut out = vec![Rational::zero(); up_to + 1];
    for (order, slot) in out.iter_mut().enumerate().skip(1) {
        let sum = values.iter().fold(Rational::zero(), |acc, v| {
            acc + rat_pow(&(v - &mean), order)
        });
        *slot = sum / &dim;
    }
    out
}

/// Centered moment `E(CV_c^q)` assembled from the pairing double sum:
/// for each ordered pair of pairings, the Weingarten value of their join
/// weighted by `(n-1)` to the number of coset blocks on each side and by the
/// products of centered spectral moments over the coset block sizes. Exact.
pub fn cv_centered_moment_weingarten_rational(
    q: usize,
    lambdas: &[Rational],
    mus: &[Rational],
    n: usize,
) -> Result<Rational> {
    if !(2..=4).contains(&q) {
        return Err(Error::UnsupportedOrder { q });
    }
    if n < q + 1 {
        return Err(Error::SmallN {
            n,
            min: q + 1,
            what: "Weingarten assembly",
        });
    }
    if lambdas.len() != n - 1 || mus.len() != n - 1 {
        return Err(Error::DimensionMismatch {
            expected: n - 1,
            found: lambdas.len().min(mus.len()),
        });
    }
    let lam_moments = centered_moments_rational(lambdas, q);
    let mu_moments = centered_moments_rational(mus, q);
    let base = rat((n - 1) as i64);
    let table = counts_table(q)?;
    let mut acc = Rational::zero();
    for ((join, coset_s, coset_t), count) in table.iter() {
        // Centered first moments vanish, killing every block of size one.
        if coset_s.parts().contains(&1) || coset_t.parts().contains(&1) {
            continue;
        }
        let mut term = Rational::from_integer(BigInt::from(*count));
        for part in coset_s.parts() {
            term *= &lam_moments[*part];
        }
        for part in coset_t.parts() {
            term *= &mu_moments[*part];
        }
        if term.is_zero() {
            continue;
        }
        term *= rat_pow(&base, coset_s.block_count() + coset_t.block_count());
        term *= weingarten_value(join, n)?;
        acc += term;
    }
    Ok(acc)
}

/// Floating-point front end of the exact assembly: spectra are converted to
/// exact rationals, assembled, and the result rounded once.
pub fn cv_centered_moment_via_weingarten(
    q: usize,
    sx: &NontrivialSpectrum,
    sy: &NontrivialSpectrum,
) -> Result<f64> {
    if sx.n() != sy.n() {
        return Err(Error::DimensionMismatch {
            expected: sx.n(),
            found: sy.n(),
        });
    }
    let to_rational = |values: &[f64]| -> Vec<Rational> {
        values
            .iter()
            .map(|v| Rational::from_float(*v).expect("spectra are finite"))
            .collect()
    };
    let lambdas = to_rational(sx.lambdas());
    let mus = to_rational(sy.lambdas());
    let exact = cv_centered_moment_weingarten_rational(q, &lambdas, &mus, sx.n())?;
    Ok(exact.to_f64().expect("moment fits in f64"))
}

/// One named exactness check.
#[derive(Debug, Clone)]
pub struct IdentityCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Outcome of a batch of exactness checks.
#[derive(Debug, Clone, Default)]
pub struct IdentityReport {
    pub checks: Vec<IdentityCheck>,
}

impl IdentityReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn push(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(IdentityCheck {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }
}

fn partition(parts: &[usize]) -> PartitionType {
    PartitionType::new(parts.to_vec()).expect("static partition")
}

/// Checks, exactly in rational arithmetic for every requested `n`, that the
/// count-weighted Weingarten sums extracted from the regenerated tables
/// equal the closed-form coefficients of the centered third and fourth
/// moments. `n` values must lie in `[5, 60]`.
pub fn verify_polynomial_identities(ns: &[usize]) -> Result<IdentityReport> {
    if let Some(bad) = ns.iter().find(|n| !(5..=60).contains(*n)) {
        return Err(Error::InvalidArgument(format!(
            "identity verification supports n in [5, 60], got {bad}"
        )));
    }
    let table3 = counts_table(3)?;
    let table4 = counts_table(4)?;
    let joins3 = partitions_of(3);
    let joins4 = partitions_of(4);
    let three = partition(&[3]);
    let four = partition(&[4]);
    let two_two = partition(&[2, 2]);

    let weighted_sum = |table: &TrivariateCountTable,
                        joins: &[PartitionType],
                        coset_s: &PartitionType,
                        coset_t: &PartitionType,
                        n: usize|
     -> Result<Rational> {
        let mut acc = Rational::zero();
        for join in joins {
            let count = table.get(join, coset_s, coset_t);
            if count > 0 {
                acc += rat(count as i64) * weingarten_value(join, n)?;
            }
        }
        Ok(acc)
    };

    let mut report = IdentityReport::default();
    for &n in ns {
        let n_i = n as i64;
        let nm1 = rat(n_i - 1);
        let phi_n = phi(n_i);

        let lhs = rat_pow(&nm1, 2) * weighted_sum(&table3, &joins3, &three, &three, n)?;
        let rhs = rat(8) * rat_pow(&nm1, 3) / rat((n_i - 3) * (n_i - 2) * (n_i + 1) * (n_i + 3));
        report.push(
            format!("q3 coefficient, n={n}"),
            lhs == rhs,
            format!("{lhs} vs {rhs}"),
        );

        let lhs = rat_pow(&nm1, 2) * weighted_sum(&table4, &joins4, &four, &four, n)?;
        let rhs = rat(48) * &phi_n * rat_pow(&nm1, 4) * rat(n_i * n_i - n_i + 2);
        report.push(
            format!("q4 quartic-quartic coefficient, n={n}"),
            lhs == rhs,
            format!("{lhs} vs {rhs}"),
        );

        let lhs = rat_pow(&nm1, 4) * weighted_sum(&table4, &joins4, &two_two, &two_two, n)?;
        let rhs = rat(12)
            * &phi_n
            * rat_pow(&nm1, 4)
            * rat(n_i.pow(4) + n_i.pow(3) - 15 * n_i * n_i - 13 * n_i + 98);
        report.push(
            format!("q4 quadratic-quadratic coefficient, n={n}"),
            lhs == rhs,
            format!("{lhs} vs {rhs}"),
        );

        let lhs_a = rat_pow(&nm1, 3) * weighted_sum(&table4, &joins4, &four, &two_two, n)?;
        let lhs_b = rat_pow(&nm1, 3) * weighted_sum(&table4, &joins4, &two_two, &four, n)?;
        let rhs = rat(-48) * &phi_n * rat_pow(&nm1, 4) * rat(2 * n_i * n_i - n_i - 7);
        report.push(
            format!("q4 cross coefficient, n={n}"),
            lhs_a == rhs && lhs_b == rhs,
            format!("{lhs_a} / {lhs_b} vs {rhs}"),
        );
    }
    Ok(report)
}

/// Compares the solved elementary systems against the closed forms
/// `E = 3(n-2)k, .., W = 2k^`, symbolically.
pub fn verify_elementary_closed_forms() -> IdentityCheck {
    let sol = solve_elementary_systems();
    let kappa =
        RatFn::inv_poly(&(&Poly::linear(-2, 1) * &Poly::linear(-1, 1)) * &Poly::linear(1, 1));
    let kappa_hat = &kappa / &RatFn::from_poly(&Poly::linear(-3, 1) * &Poly::linear(3, 1));
    let poly = |c: &[i64]| RatFn::from_poly(Poly::from_coeffs(c));
    let over_n3 = |c: &[i64]| &RatFn::new(Poly::from_coeffs(c), Poly::linear(3, 1)) * &kappa;
    let expected2 = [
        (order2::E, &poly(&[-6, 3]) * &kappa),
        (order2::F, &poly(&[-2, 1]) * &kappa),
        (order2::G, &poly(&[0, 1]) * &kappa),
        (order2::H, &poly(&[-1]) * &kappa),
    ];
    let expected3 = [
        (order3::L, over_n3(&[-30, 15])),
        (order3::M, over_n3(&[-6, 3])),
        (order3::N, over_n3(&[-2, 1])),
        (order3::P, over_n3(&[6, 3])),
        (order3::Q, over_n3(&[0, 1])),
        (order3::R, over_n3(&[-3])),
        (order3::S, over_n3(&[2, 1])),
        (order3::T, over_n3(&[-1])),
        (order3::U, &poly(&[-4, 1, 1]) * &kappa_hat),
        (order3::V, &poly(&[-1, -1]) * &kappa_hat),
        (order3::W, &poly(&[2]) * &kappa_hat),
    ];
    let mismatches: Vec<String> = expected2
        .iter()
        .filter(|(i, e)| &sol.order2[*i] != e)
        .map(|(i, _)| format!("order2[{i}]"))
        .chain(
            expected3
                .iter()
                .filter(|(i, e)| &sol.order3[*i] != e)
                .map(|(i, _)| format!("order3[{i}]")),
        )
        .collect();
    IdentityCheck {
        name: "elementary systems vs closed forms (symbolic)".into(),
        passed: mismatches.is_empty(),
        detail: if mismatches.is_empty() {
            "all fifteen coefficients match".into()
        } else {
            format!("mismatches: {mismatches:?}")
        },
    }
}

/// Checks exactly that summing `E(P_ab P_cd P_ez)` over the fifth row index
/// reproduces `E(P_ab P_cd)` for every Greek tuple at the given `n`.
pub fn verify_marginalization(n: usize) -> Result<IdentityCheck> {
    if n < 4 {
        return Err(Error::SmallN {
            n,
            min: 4,
            what: "marginalization identity",
        });
    }
    let d = n - 1;
    let n_i = n as i64;
    let mut memo: std::collections::HashMap<DeltaAggregates, Rational> =
        std::collections::HashMap::new();
    let mut failures = 0u64;
    let mut tuples = 0u64;
    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                for dd in 0..d {
                    for z in 0..d {
                        let expected = order2_value(a == c, b == dd, n_i);
                        let mut sum = Rational::zero();
                        for e in 0..d {
                            let agg = DeltaAggregates::from_indices(&[a, b, c, dd, e, z]);
                            let value = memo.entry(agg).or_insert_with(|| order3_value(&agg, n_i));
                            sum += &*value;
                        }
                        tuples += 1;
                        if sum != expected {
                            failures += 1;
                        }
                    }
                }
            }
        }
    }
    Ok(IdentityCheck {
        name: format!("triple-product marginalization, n={n}"),
        passed: failures == 0,
        detail: format!("{failures} failures over {tuples} Greek tuples"),
    })
}
