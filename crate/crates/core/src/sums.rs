//! Gauss sums, Jacobi sums and character binomial coefficients.
//!
//! [`CharSums`] precomputes every Gauss sum of a field once and serves the
//! closed-form inverses and the binomial tables that the hypergeometric and
//! Appell evaluators consume in their inner loops. It is generic over the
//! [`Scalar`] backend: the exact tables are computed first and the float
//! tables are their complex images.

use std::borrow::Cow;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;

use crate::chars::MultChar;
use crate::cyclo::{CycloNumber, Scalar};
use crate::field::{prime_factors, FieldContext};

/// Largest `q - 1` for which products of two Gauss sums are tabulated.
const PAIR_TABLE_LIMIT: u32 = 128;

/// How [`gauss_table`] computes the Gauss sums.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GaussStrategy {
    /// One `q`-term sum per character.
    Naive,
    /// All characters at once as a mixed-radix DFT over the cyclic group
    /// `F_q^x`.
    Dft,
}

/// `g(chi_k)` for `k = 0, ..., q - 2`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussTable {
    pub values: Vec<CycloNumber>,
}

/// The Gauss sum `g(chi) = sum_x chi(x) theta(x)` by direct summation.
pub fn gauss(ctx: &FieldContext, chi: MultChar) -> CycloNumber {
    let m = ctx.root_order();
    let mut counts = vec![0i64; m as usize];
    for x in ctx.units() {
        let e = ctx.char_exponent(chi.index(), x).unwrap() + ctx.add_exponent(x);
        counts[(e % m as i64) as usize] += 1;
    }
    CycloNumber::from_counts(m, &counts)
}

/// The Jacobi sum `J(A, B) = sum_x A(x) B(1 - x)` by direct summation.
pub fn jacobi(ctx: &FieldContext, a: MultChar, b: MultChar) -> CycloNumber {
    jacobi_sum::<CycloNumber>(ctx, a.index(), b.index())
}

fn jacobi_sum<V: Scalar>(ctx: &FieldContext, a: u32, b: u32) -> V {
    let m = ctx.root_order();
    let mut counts = vec![0i64; m as usize];
    for x in ctx.units() {
        if let Some(eb) = ctx.char_exponent(b, ctx.one_minus(x)) {
            let e = ctx.char_exponent(a, x).unwrap() + eb;
            counts[(e % m as i64) as usize] += 1;
        }
    }
    V::from_counts(m, &counts)
}

pub fn gauss_table(ctx: &FieldContext, strategy: GaussStrategy) -> GaussTable {
    let values = match strategy {
        GaussStrategy::Naive => ctx.characters().map(|chi| gauss(ctx, chi)).collect(),
        GaussStrategy::Dft => {
            let m = ctx.root_order();
            // f(j) = theta(g^j); g(chi_k) = sum_j zeta_{q-1}^{kj} f(j).
            let input: Vec<CycloNumber> = ctx
                .units()
                .map(|x| CycloNumber::root_of_unity(m, ctx.add_exponent(x)))
                .collect();
            cyclic_dft(&input, m, ctx.characteristic() as i64)
        }
    };
    GaussTable { values }
}

/// Mixed-radix DFT `X[k] = sum_j w^{jk} f[j]` over `Z/n`, where `w =
/// zeta_m^unit` has order `n = f.len()`. Twiddles are exact rotations.
fn cyclic_dft<V: Scalar>(f: &[V], m: u32, unit: i64) -> Vec<V> {
    let n = f.len();
    if n == 1 {
        return f.to_vec();
    }
    let radix = prime_factors(n as u64)[0] as usize;
    let len = n / radix;
    // f[a + radix * b] for fixed a forms a length-`len` DFT with w^radix.
    let parts: Vec<Vec<V>> = (0..radix)
        .map(|a| {
            let sub: Vec<V> = f.iter().skip(a).step_by(radix).cloned().collect();
            cyclic_dft(&sub, m, unit * radix as i64)
        })
        .collect();
    (0..n)
        .map(|k| {
            let mut acc = V::zero(m);
            for (a, part) in parts.iter().enumerate() {
                acc.add_rotated(m, &part[k % len], unit * ((a * k) % n) as i64);
            }
            acc
        })
        .collect()
}

/// Gauss sums of one field with their closed-form inverses and the derived
/// binomial coefficient tables.
pub struct CharSums<V: Scalar> {
    ctx: Arc<FieldContext>,
    m: u32,
    n: u32,
    gauss: Vec<V>,
    gauss_inv: Vec<V>,
    pairs: OnceLock<Vec<V>>,
    binom: OnceLock<Vec<V>>,
    binom_inv: OnceLock<Vec<V>>,
}

pub type ExactSums = CharSums<CycloNumber>;
pub type FloatSums = CharSums<Complex64>;

impl CharSums<CycloNumber> {
    pub fn new(ctx: Arc<FieldContext>) -> Self {
        Self::with_strategy(ctx, GaussStrategy::Dft)
    }

    pub fn with_strategy(ctx: Arc<FieldContext>, strategy: GaussStrategy) -> Self {
        let q = ctx.order() as i64;
        let table: Vec<CycloNumber> = gauss_table(&ctx, strategy)
            .values
            .iter()
            .map(|g| g.canonical())
            .collect();
        // g(chi)^{-1} = chi(-1) g(chi-bar) / q for chi != eps; g(eps)^{-1} = -1.
        let inverses = ctx
            .characters()
            .map(|chi| {
                if chi.is_trivial() {
                    CycloNumber::from_int(ctx.root_order(), -1)
                } else {
                    table[chi.inverse().index() as usize]
                        .scale(chi.at_minus_one(), q)
                        .expect("q > 0")
                        .canonical()
                }
            })
            .collect();
        Self::from_tables(ctx, table, inverses)
    }

    /// The float backend: complex images of the exact Gauss tables.
    pub fn to_float(&self) -> FloatSums {
        CharSums::from_tables(
            Arc::clone(&self.ctx),
            self.gauss.iter().map(|g| g.to_complex()).collect(),
            self.gauss_inv.iter().map(|g| g.to_complex()).collect(),
        )
    }
}

impl CharSums<Complex64> {
    /// Float tables computed directly in `f64`, independent of the exact
    /// backend.
    pub fn new(ctx: Arc<FieldContext>) -> Self {
        let m = ctx.root_order();
        let gauss: Vec<Complex64> = ctx
            .characters()
            .map(|chi| {
                ctx.units()
                    .map(|x| {
                        let e = ctx.char_exponent(chi.index(), x).expect("unit") + ctx.add_exponent(x);
                        <Complex64 as Scalar>::root(m, e)
                    })
                    .sum()
            })
            .collect();
        let inverses = ctx
            .characters()
            .map(|chi| {
                if chi.is_trivial() {
                    Complex64::new(-1.0, 0.0)
                } else {
                    gauss[chi.index() as usize].inv()
                }
            })
            .collect();
        Self::from_tables(ctx, gauss, inverses)
    }
}

impl<V: Scalar> CharSums<V> {
    fn from_tables(ctx: Arc<FieldContext>, gauss: Vec<V>, gauss_inv: Vec<V>) -> Self {
        CharSums {
            m: ctx.root_order(),
            n: ctx.group_order(),
            ctx,
            gauss,
            gauss_inv,
            pairs: OnceLock::new(),
            binom: OnceLock::new(),
            binom_inv: OnceLock::new(),
        }
    }

    pub fn field(&self) -> &FieldContext {
        &self.ctx
    }

    pub fn field_arc(&self) -> &Arc<FieldContext> {
        &self.ctx
    }

    /// Order of the ambient roots of unity, `p(q - 1)`.
    pub fn m(&self) -> u32 {
        self.m
    }

    /// Number of characters, `q - 1`.
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn q(&self) -> i64 {
        self.ctx.order() as i64
    }

    /// Character index arithmetic mod `q - 1`.
    #[inline]
    pub fn idx(&self, k: i64) -> u32 {
        k.rem_euclid(self.n as i64) as u32
    }

    #[inline]
    pub fn g(&self, k: u32) -> &V {
        &self.gauss[k as usize]
    }

    #[inline]
    pub fn g_inv(&self, k: u32) -> &V {
        &self.gauss_inv[k as usize]
    }

    pub fn gauss_table(&self) -> &[V] {
        &self.gauss
    }

    /// `g(chi_a) g(chi_b)`, tabulated for small fields.
    pub fn gauss_pair(&self, a: u32, b: u32) -> Cow<'_, V> {
        if self.n > PAIR_TABLE_LIMIT {
            return Cow::Owned(self.g(a).mul(self.g(b)));
        }
        let table = self.pairs.get_or_init(|| {
            let n = self.n;
            (0..n * n).map(|i| self.g(i / n).mul(self.g(i % n))).collect()
        });
        Cow::Borrowed(&table[(a * self.n + b) as usize])
    }

    /// `chi_k(-1)`.
    #[inline]
    pub fn sign(&self, k: u32) -> i64 {
        if k.is_multiple_of(2) {
            1
        } else {
            -1
        }
    }

    pub fn one(&self) -> V {
        V::ratio(self.m, 1, 1)
    }

    pub fn zero(&self) -> V {
        V::zero(self.m)
    }

    /// `J(chi_a, chi_b)` by direct summation.
    pub fn jacobi(&self, a: u32, b: u32) -> V {
        jacobi_sum(&self.ctx, a, b)
    }

    /// `J(A, B) = g(A) g(B) / g(AB) + (q - 1) B(-1) delta(AB)`.
    pub fn jacobi_closed_form(&self, a: u32, b: u32) -> V {
        let ab = self.idx(a as i64 + b as i64);
        let mut out = self.gauss_pair(a, b).mul(self.g_inv(ab));
        if ab == 0 {
            out.add_assign(&V::ratio(self.m, (self.q() - 1) * self.sign(b), 1));
        }
        out
    }

    fn binom_direct(&self, a: u32, b: u32) -> V {
        let b_bar = self.idx(-(b as i64));
        self.jacobi(a, b_bar).scale(self.sign(b), self.q())
    }

    /// `(A | B)^{-1}` from the Gauss-sum decomposition of `J(A, B-bar)`.
    fn binom_inv_closed(&self, a: u32, b: u32) -> V {
        let q = self.q();
        let b_bar = self.idx(-(b as i64));
        if a != b {
            // q B(-1) g(AB-bar) / (g(A) g(B-bar))
            let ab_bar = self.idx(a as i64 - b as i64);
            self.g(ab_bar)
                .mul(self.g_inv(a))
                .mul(self.g_inv(b_bar))
                .scale(q * self.sign(b), 1)
        } else {
            // A = B: J(A, A-bar) reduces to a rational.
            let j = self.jacobi_closed_form(a, b_bar);
            j.recip_rational()
                .expect("J(A, A-bar) is a nonzero rational")
                .scale(q * self.sign(b), 1)
        }
    }

    fn binom_tables(&self) -> &Vec<V> {
        self.binom.get_or_init(|| {
            let n = self.n;
            (0..n * n).map(|i| self.binom_direct(i / n, i % n)).collect()
        })
    }

    /// Binomial coefficient `(A | B) = B(-1)/q * J(A, B-bar)`.
    pub fn binom(&self, a: u32, b: u32) -> &V {
        &self.binom_tables()[(a * self.n + b) as usize]
    }

    /// `(A | B)^{-1}`, never by general field inversion.
    pub fn binom_inv(&self, a: u32, b: u32) -> &V {
        let table = self.binom_inv.get_or_init(|| {
            let n = self.n;
            (0..n * n).map(|i| self.binom_inv_closed(i / n, i % n)).collect()
        });
        &table[(a * self.n + b) as usize]
    }

    /// `chi_k(x)`.
    pub fn chi(&self, k: u32, x: crate::field::FieldElement) -> V {
        match self.ctx.char_exponent(k, x) {
            None => V::zero(self.m),
            Some(e) => V::root(self.m, e),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sums(p: u32, r: u32) -> ExactSums {
        ExactSums::new(Arc::new(FieldContext::new(p, r).unwrap()))
    }

    const SMALL: [(u32, u32); 6] = [(3, 1), (5, 1), (7, 1), (3, 2), (11, 1), (13, 1)];

    #[test]
    fn gauss_of_trivial_is_minus_one() {
        for (p, r) in SMALL {
            let s = sums(p, r);
            assert_eq!(*s.g(0), CycloNumber::from_int(s.m(), -1));
        }
    }

    #[test]
    fn gauss_f3_quadratic() {
        let ctx = FieldContext::new(3, 1).unwrap();
        let g = gauss(&ctx, ctx.quadratic_character());
        let z = |e| CycloNumber::root_of_unity(6, e);
        // zeta_3 = zeta_6^2
        assert_eq!(g, z(2).sub(&z(4)));
    }

    #[test]
    fn gauss_f5_quadratic_squares_to_five() {
        let ctx = FieldContext::new(5, 1).unwrap();
        let g = gauss(&ctx, ctx.quadratic_character());
        assert_eq!(g.mul(&g), CycloNumber::from_int(20, 5));
    }

    #[test]
    fn table_shapes() {
        let ctx = FieldContext::new(3, 2).unwrap();
        let t = gauss_table(&ctx, GaussStrategy::Naive);
        assert_eq!(t.values.len(), 8);
        for v in &t.values {
            assert!(v.raw_parts().0.iter().filter(|&&c| c != 0).count() <= 9);
        }
    }

    #[test]
    fn strategies_agree() {
        for (p, r) in SMALL {
            let ctx = FieldContext::new(p, r).unwrap();
            let naive = gauss_table(&ctx, GaussStrategy::Naive);
            let dft = gauss_table(&ctx, GaussStrategy::Dft);
            assert_eq!(naive, dft, "q = {}", ctx.order());
        }
    }

    #[test]
    fn inverse_contract() {
        for (p, r) in SMALL {
            let s = sums(p, r);
            let one = s.one();
            for k in 0..s.n() {
                assert_eq!(s.g(k).mul(s.g_inv(k)), one);
            }
        }
    }

    #[test]
    fn jacobi_examples() {
        let ctx = FieldContext::new(5, 1).unwrap();
        let phi = ctx.quadratic_character();
        assert_eq!(jacobi(&ctx, phi, phi), CycloNumber::from_int(20, -1));
        for (p, r) in SMALL {
            let ctx = FieldContext::new(p, r).unwrap();
            let eps = ctx.trivial_character();
            let q = ctx.order() as i64;
            assert_eq!(jacobi(&ctx, eps, eps), CycloNumber::from_int(ctx.root_order(), q - 2));
        }
        // J(chi_1, chi_1) = g(chi_1)^2 / g(chi_2) over F_5.
        let s = sums(5, 1);
        let closed = s.g(1).mul(s.g(1)).mul(s.g_inv(2));
        assert_eq!(s.jacobi(1, 1), closed);
    }

    #[test]
    fn binomial_examples() {
        let s = sums(5, 1);
        assert_eq!(*s.binom(0, 0), CycloNumber::rational(20, 3, 5).unwrap());
        for a in 0..4 {
            for b in 0..4 {
                let rhs = s.binom(s.idx(b as i64 - a as i64), b).scale(s.sign(b), 1).unwrap();
                assert_eq!(*s.binom(a, b), rhs);
            }
        }
    }

    #[test]
    fn binomial_inverse_and_nonvanishing() {
        for (p, r) in SMALL {
            let s = sums(p, r);
            let one = s.one();
            for a in 0..s.n() {
                for b in 0..s.n() {
                    assert!(!s.binom(a, b).is_zero());
                    assert_eq!(s.binom(a, b).mul(s.binom_inv(a, b)), one, "q={} a={a} b={b}", s.q());
                    assert_eq!(s.binom_inv(a, b).mul(&s.binom_direct(a, b)), one);
                }
            }
        }
    }

    #[test]
    fn float_tables_track_exact() {
        let s = sums(7, 1);
        let f = FloatSums::new(Arc::clone(s.field_arc()));
        for k in 0..s.n() {
            assert!((s.g(k).to_complex() - f.g(k)).norm() < 1e-9);
            assert!((s.g(k).to_complex() - s.to_float().g(k)).norm() < 1e-12);
            let direct = s.binom(k, 3).to_complex();
            assert!((direct - f.binom(k, 3)).norm() < 1e-9);
            assert!((s.binom_inv(k, 3).to_complex() - f.binom_inv(k, 3)).norm() < 1e-9);
        }
    }
}
