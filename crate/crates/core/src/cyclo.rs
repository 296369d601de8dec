//! Exact arithmetic in the cyclotomic field `Q(zeta_m)`.
//!
//! A [`CycloNumber`] is stored as a dense integer vector over the redundant
//! basis `1, z, ..., z^{m-1}` (with `z = zeta_m`) together with one positive
//! common denominator. Arithmetic happens in `Z[x]/(x^m - 1)`, where
//! multiplication by a root of unity is a rotation; reduction modulo the
//! cyclotomic polynomial `Phi_m` is deferred to equality and zero tests.
//!
//! The [`Scalar`] trait abstracts over this exact type and over `Complex64`,
//! so every evaluator can also run on a floating-point backend.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use num_integer::Integer;

use crate::error::{Error, Result};

const OVERFLOW: &str = "cyclotomic coefficient overflow (i128)";

fn cyclo_cache() -> &'static Mutex<HashMap<u32, Arc<Vec<i64>>>> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<Vec<i64>>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Exact quotient of `a` by the monic polynomial `b`; both low-degree first.
fn poly_exact_div(a: &[i64], b: &[i64]) -> Vec<i64> {
    let db = b.len() - 1;
    debug_assert_eq!(b[db], 1);
    let mut rem = a.to_vec();
    let mut quot = vec![0i64; a.len() - db];
    for i in (0..quot.len()).rev() {
        let c = rem[i + db];
        quot[i] = c;
        if c != 0 {
            for (j, &bj) in b.iter().enumerate() {
                rem[i + j] -= c * bj;
            }
        }
    }
    debug_assert!(rem.iter().all(|&c| c == 0), "division is not exact");
    quot
}

/// The `m`-th cyclotomic polynomial, coefficients from the constant term.
///
/// Computed as `(x^m - 1) / prod_{d | m, d < m} Phi_d` and cached per `m`.
pub fn cyclotomic_polynomial(m: u32) -> Arc<Vec<i64>> {
    assert!(m >= 1, "cyclotomic polynomial of order 0");
    if let Some(hit) = cyclo_cache().lock().unwrap().get(&m) {
        return Arc::clone(hit);
    }
    let mut poly = vec![0i64; m as usize + 1];
    poly[0] = -1;
    poly[m as usize] = 1;
    for d in 1..m {
        if m.is_multiple_of(d) {
            poly = poly_exact_div(&poly, &cyclotomic_polynomial(d));
        }
    }
    let poly = Arc::new(poly);
    cyclo_cache()
        .lock()
        .unwrap()
        .entry(m)
        .or_insert_with(|| Arc::clone(&poly));
    poly
}

/// Euler's totient, the degree of `Phi_m`.
pub fn totient(m: u32) -> u32 {
    (cyclotomic_polynomial(m).len() - 1) as u32
}

/// An exact element of `Q(zeta_m)`.
#[derive(Clone)]
pub struct CycloNumber {
    m: u32,
    num: Vec<i128>,
    den: i128,
}

fn gcd_all(den: i128, num: &[i128]) -> i128 {
    let mut g = den.abs();
    for &c in num {
        if g == 1 {
            break;
        }
        if c != 0 {
            g = g.gcd(&c);
        }
    }
    g
}

impl CycloNumber {
    pub fn zero(m: u32) -> Self {
        assert!(m >= 1);
        CycloNumber {
            m,
            num: vec![0; m as usize],
            den: 1,
        }
    }

    pub fn one(m: u32) -> Self {
        Self::from_int(m, 1)
    }

    pub fn from_int(m: u32, n: i64) -> Self {
        let mut z = Self::zero(m);
        z.num[0] = n as i128;
        z
    }

    /// The rational `num / den`.
    pub fn rational(m: u32, num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::ZeroDenominator);
        }
        Self::one(m).scale(num, den)
    }

    /// `zeta_m^e`, exponent reduced mod `m`.
    pub fn root_of_unity(m: u32, e: i64) -> Self {
        let mut z = Self::zero(m);
        z.num[e.rem_euclid(m as i64) as usize] = 1;
        z
    }

    /// `sum_e counts[e] * zeta_m^e`.
    pub fn from_counts(m: u32, counts: &[i64]) -> Self {
        assert_eq!(counts.len(), m as usize);
        CycloNumber {
            m,
            num: counts.iter().map(|&c| c as i128).collect(),
            den: 1,
        }
    }

    pub fn order(&self) -> u32 {
        self.m
    }

    /// Coefficients over the redundant basis and the common denominator.
    pub fn raw_parts(&self) -> (&[i128], i128) {
        (&self.num, self.den)
    }

    fn normalize(&mut self) {
        if self.den == 1 {
            return;
        }
        let g = gcd_all(self.den, &self.num);
        if g > 1 {
            self.den /= g;
            for c in &mut self.num {
                *c /= g;
            }
        }
    }

    fn same_order(&self, other: &Self) {
        assert_eq!(self.m, other.m, "cyclotomic numbers of different orders");
    }

    /// Rescales both operands to a common denominator and combines them.
    fn combine(&self, other: &Self, sign: i128) -> Self {
        self.same_order(other);
        if self.den == other.den {
            let num = self
                .num
                .iter()
                .zip(&other.num)
                .map(|(&a, &b)| a.checked_add(sign * b).expect(OVERFLOW))
                .collect();
            return CycloNumber {
                m: self.m,
                num,
                den: self.den,
            };
        }
        let l = self.den.lcm(&other.den);
        let (fa, fb) = (l / self.den, sign * (l / other.den));
        let num = self
            .num
            .iter()
            .zip(&other.num)
            .map(|(&a, &b)| {
                a.checked_mul(fa)
                    .and_then(|x| b.checked_mul(fb).and_then(|y| x.checked_add(y)))
                    .expect(OVERFLOW)
            })
            .collect();
        CycloNumber { m: self.m, num, den: l }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, 1)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, -1)
    }

    pub fn neg(&self) -> Self {
        CycloNumber {
            m: self.m,
            num: self.num.iter().map(|&c| -c).collect(),
            den: self.den,
        }
    }

    fn l1_norm(&self) -> Option<i128> {
        self.num
            .iter()
            .try_fold(0i128, |acc, &c| acc.checked_add(c.checked_abs()?))
    }

    fn max_abs(&self) -> i128 {
        self.num.iter().map(|c| c.abs()).max().unwrap_or(0)
    }

    fn nonzeros(&self) -> usize {
        self.num.iter().filter(|&&c| c != 0).count()
    }

    /// Product, or `None` when a coefficient would leave the `i128` range.
    pub fn checked_mul(&self, other: &Self) -> Option<Self> {
        self.same_order(other);
        // Iterate over the sparser operand; rotate-accumulate the denser one.
        let (sparse, dense) = if self.nonzeros() <= other.nonzeros() {
            (self, other)
        } else {
            (other, self)
        };
        let m = self.m as usize;
        let den = self.den.checked_mul(other.den)?;
        // Every partial sum is bounded by |sparse|_1 * |dense|_inf.
        sparse.l1_norm()?.checked_mul(dense.max_abs())?;
        // Canonical representatives occupy a short prefix; skip the zero tail.
        let hi = dense.num.iter().rposition(|&c| c != 0).map_or(0, |i| i + 1);
        let mut out = vec![0i128; m];
        for (i, &a) in sparse.num.iter().enumerate() {
            if a == 0 {
                continue;
            }
            let end = i + hi;
            if end <= m {
                for (o, &b) in out[i..end].iter_mut().zip(&dense.num[..hi]) {
                    *o += a * b;
                }
            } else {
                let (head, tail) = out.split_at_mut(i);
                let (d_lo, d_hi) = dense.num[..hi].split_at(m - i);
                for (o, &b) in tail.iter_mut().zip(d_lo) {
                    *o += a * b;
                }
                for (o, &b) in head.iter_mut().zip(d_hi) {
                    *o += a * b;
                }
            }
        }
        let mut z = CycloNumber {
            m: self.m,
            num: out,
            den,
        };
        z.normalize();
        Some(z)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.checked_mul(other).expect(OVERFLOW)
    }

    /// Multiplication by the rational `num / den`.
    pub fn scale(&self, num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::ZeroDenominator);
        }
        let sign = if den < 0 { -1 } else { 1 };
        let (n, d) = (sign * num as i128, sign * den as i128);
        let mut z = CycloNumber {
            m: self.m,
            num: self.num.iter().map(|&c| c.checked_mul(n).expect(OVERFLOW)).collect(),
            den: self.den.checked_mul(d).expect(OVERFLOW),
        };
        z.normalize();
        Ok(z)
    }

    /// Multiplication by `zeta_m^e`.
    pub fn rotate(&self, e: i64) -> Self {
        let m = self.m as usize;
        let e = e.rem_euclid(m as i64) as usize;
        let mut num = vec![0; m];
        num[e..].copy_from_slice(&self.num[..m - e]);
        num[..e].copy_from_slice(&self.num[m - e..]);
        CycloNumber {
            m: self.m,
            num,
            den: self.den,
        }
    }

    /// `self += other * zeta_m^e`.
    pub fn add_rotated(&mut self, other: &Self, e: i64) {
        self.same_order(other);
        let m = self.m as usize;
        let e = e.rem_euclid(m as i64) as usize;
        if self.den != other.den {
            *self = self.add(&other.rotate(e as i64));
            return;
        }
        let (head, tail) = self.num.split_at_mut(e);
        let (lo, hi) = other.num.split_at(m - e);
        for (o, &b) in tail.iter_mut().zip(lo) {
            *o = o.checked_add(b).expect(OVERFLOW);
        }
        for (o, &b) in head.iter_mut().zip(hi) {
            *o = o.checked_add(b).expect(OVERFLOW);
        }
    }

    /// Image under the Galois automorphism `zeta_m -> zeta_m^t`, `gcd(t, m) = 1`.
    pub fn galois(&self, t: i64) -> Self {
        let m = self.m as i64;
        debug_assert_eq!(t.rem_euclid(m).gcd(&m), 1);
        let mut num = vec![0; self.m as usize];
        for (e, &c) in self.num.iter().enumerate() {
            num[(e as i64 * t).rem_euclid(m) as usize] += c;
        }
        CycloNumber {
            m: self.m,
            num,
            den: self.den,
        }
    }

    /// Complex conjugation, `zeta_m^e -> zeta_m^{-e}`.
    pub fn conjugate(&self) -> Self {
        self.galois(-1)
    }

    /// Numerator reduced modulo `Phi_m` (length `phi(m)`) and the
    /// denominator, with their common content removed.
    pub fn reduced(&self) -> (Vec<i128>, i128) {
        let phi = cyclotomic_polynomial(self.m);
        let deg = phi.len() - 1;
        let mut a = self.num.clone();
        for i in (deg..a.len()).rev() {
            let c = a[i];
            if c == 0 {
                continue;
            }
            for (j, &pj) in phi.iter().enumerate() {
                if pj != 0 {
                    let idx = i - deg + j;
                    a[idx] = a[idx]
                        .checked_sub(c.checked_mul(pj as i128).expect(OVERFLOW))
                        .expect(OVERFLOW);
                }
            }
        }
        a.truncate(deg);
        let g = gcd_all(self.den, &a);
        let g = if a.iter().all(|&c| c == 0) { self.den } else { g };
        (a.into_iter().map(|c| c / g).collect(), self.den / g)
    }

    /// Canonical representative: reduced modulo `Phi_m`, stored back in the
    /// redundant basis.
    pub fn canonical(&self) -> Self {
        let (red, den) = self.reduced();
        let mut num = vec![0; self.m as usize];
        num[..red.len()].copy_from_slice(&red);
        CycloNumber { m: self.m, num, den }
    }

    pub fn is_zero(&self) -> bool {
        if self.num.iter().all(|&c| c == 0) {
            return true;
        }
        self.reduced().0.iter().all(|&c| c == 0)
    }

    /// Nonzero canonical terms `(exponent, numerator, denominator)`, each
    /// coefficient in lowest terms.
    pub fn canonical_terms(&self) -> Vec<(u32, i128, i128)> {
        let (red, den) = self.reduced();
        red.into_iter()
            .enumerate()
            .filter(|&(_, c)| c != 0)
            .map(|(e, c)| {
                let g = c.gcd(&den);
                (e as u32, c / g, den / g)
            })
            .collect()
    }

    /// The value as a rational number, if it is one.
    pub fn as_rational(&self) -> Option<(i128, i128)> {
        let (red, den) = self.reduced();
        if red.iter().skip(1).any(|&c| c != 0) {
            return None;
        }
        let c = red.first().copied().unwrap_or(0);
        let g = c.gcd(&den).max(1);
        Some((c / g, den / g))
    }

    /// Multiplicative inverse through the norm: `a^{-1} = prod_{t != 1}
    /// sigma_t(a) / N(a)`. A fallback for values without a closed-form
    /// inverse; fails on zero or when intermediate coefficients overflow.
    pub fn inverse(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::NotInvertible("zero".into()));
        }
        let m = self.m as i64;
        let overflow = || Error::NotInvertible("coefficient overflow".into());
        let mut cofactor = Self::one(self.m);
        for t in 2..m.max(2) {
            if t.gcd(&m) == 1 {
                cofactor = cofactor.checked_mul(&self.galois(t)).ok_or_else(overflow)?.canonical();
            }
        }
        let norm = self.checked_mul(&cofactor).ok_or_else(overflow)?;
        let (n, d) = norm.as_rational().expect("the norm is rational");
        let mut inv = cofactor;
        inv.num
            .iter_mut()
            .try_for_each(|c| {
                *c = c.checked_mul(d)?;
                Some(())
            })
            .ok_or_else(overflow)?;
        inv.den = inv.den.checked_mul(n).ok_or_else(overflow)?;
        if inv.den < 0 {
            inv.den = -inv.den;
            inv.num.iter_mut().for_each(|c| *c = -*c);
        }
        inv.normalize();
        Ok(inv)
    }

    /// Complex embedding `zeta_m -> exp(2 pi i / m)`.
    pub fn to_complex(&self) -> Complex64 {
        let m = self.m as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for (e, &c) in self.num.iter().enumerate() {
            if c != 0 {
                acc += Complex64::from_polar(c as f64, std::f64::consts::TAU * e as f64 / m);
            }
        }
        acc / self.den as f64
    }
}

impl PartialEq for CycloNumber {
    fn eq(&self, other: &Self) -> bool {
        self.m == other.m && self.sub(other).is_zero()
    }
}

impl Eq for CycloNumber {}

impl fmt::Debug for CycloNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CycloNumber(m={}, {})", self.m, self)
    }
}

fn ratio_string(n: i128, d: i128) -> String {
    if d == 1 {
        n.to_string()
    } else {
        format!("{n}/{d}")
    }
}

/// Canonical text form, e.g. `-1`, `z^4 - z^8`, `3/5 + 2/5*z^3`, where `z`
/// stands for `zeta_m`.
impl fmt::Display for CycloNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.canonical_terms();
        if terms.is_empty() {
            return write!(f, "0");
        }
        for (i, &(e, n, d)) in terms.iter().enumerate() {
            let mag = n.abs();
            if i == 0 {
                if n < 0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if n < 0 { '-' } else { '+' })?;
            }
            let mono = match e {
                0 => String::new(),
                1 => "z".to_string(),
                _ => format!("z^{e}"),
            };
            match (e, mag, d) {
                (0, _, _) => write!(f, "{}", ratio_string(mag, d))?,
                (_, 1, 1) => write!(f, "{mono}")?,
                _ => write!(f, "{}*{mono}", ratio_string(mag, d))?,
            }
        }
        Ok(())
    }
}

/// Ring operations shared by the exact and the floating-point backends.
///
/// `m` is the order of the ambient roots of unity; the exact backend checks it
/// against its own, the float backend uses it to place roots on the circle.
pub trait Scalar: Clone + Send + Sync + fmt::Debug + 'static {
    fn zero(m: u32) -> Self;
    /// `num / den` with `den > 0`.
    fn ratio(m: u32, num: i64, den: i64) -> Self;
    fn root(m: u32, e: i64) -> Self;
    /// `sum_e counts[e] * zeta_m^e`.
    fn from_counts(m: u32, counts: &[i64]) -> Self;
    fn add_assign(&mut self, rhs: &Self);
    fn sub_assign(&mut self, rhs: &Self);
    fn mul(&self, rhs: &Self) -> Self;
    fn scale(&self, num: i64, den: i64) -> Self;
    fn rotate(&self, m: u32, e: i64) -> Self;
    fn add_rotated(&mut self, m: u32, rhs: &Self, e: i64);
    /// Inverse of a value known to be a nonzero rational.
    fn recip_rational(&self) -> Option<Self>;
    fn to_complex(&self) -> Complex64;
}

impl Scalar for CycloNumber {
    fn zero(m: u32) -> Self {
        CycloNumber::zero(m)
    }
    fn ratio(m: u32, num: i64, den: i64) -> Self {
        CycloNumber::rational(m, num, den).expect("nonzero denominator")
    }
    fn root(m: u32, e: i64) -> Self {
        CycloNumber::root_of_unity(m, e)
    }
    fn from_counts(m: u32, counts: &[i64]) -> Self {
        CycloNumber::from_counts(m, counts)
    }
    fn add_assign(&mut self, rhs: &Self) {
        *self = CycloNumber::add(self, rhs);
    }
    fn sub_assign(&mut self, rhs: &Self) {
        *self = CycloNumber::sub(self, rhs);
    }
    /// Products are kept canonical so chained products stay short.
    fn mul(&self, rhs: &Self) -> Self {
        CycloNumber::mul(self, rhs).canonical()
    }
    fn scale(&self, num: i64, den: i64) -> Self {
        CycloNumber::scale(self, num, den).expect("nonzero denominator")
    }
    fn rotate(&self, m: u32, e: i64) -> Self {
        debug_assert_eq!(m, self.m);
        CycloNumber::rotate(self, e)
    }
    fn add_rotated(&mut self, m: u32, rhs: &Self, e: i64) {
        debug_assert_eq!(m, self.m);
        CycloNumber::add_rotated(self, rhs, e)
    }
    fn recip_rational(&self) -> Option<Self> {
        let (n, d) = self.as_rational()?;
        if n == 0 {
            return None;
        }
        let (n, d) = (i64::try_from(n).ok()?, i64::try_from(d).ok()?);
        CycloNumber::rational(self.m, d, n).ok()
    }
    fn to_complex(&self) -> Complex64 {
        CycloNumber::to_complex(self)
    }
}

fn unit_root(m: u32, e: i64) -> Complex64 {
    let e = e.rem_euclid(m as i64);
    Complex64::from_polar(1.0, std::f64::consts::TAU * e as f64 / m as f64)
}

impl Scalar for Complex64 {
    fn zero(_m: u32) -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn ratio(_m: u32, num: i64, den: i64) -> Self {
        Complex64::new(num as f64 / den as f64, 0.0)
    }
    fn root(m: u32, e: i64) -> Self {
        unit_root(m, e)
    }
    fn from_counts(m: u32, counts: &[i64]) -> Self {
        counts
            .iter()
            .enumerate()
            .filter(|&(_, &c)| c != 0)
            .map(|(e, &c)| unit_root(m, e as i64) * c as f64)
            .sum()
    }
    fn add_assign(&mut self, rhs: &Self) {
        *self += rhs;
    }
    fn sub_assign(&mut self, rhs: &Self) {
        *self -= rhs;
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn scale(&self, num: i64, den: i64) -> Self {
        self * (num as f64 / den as f64)
    }
    fn rotate(&self, m: u32, e: i64) -> Self {
        self * unit_root(m, e)
    }
    fn add_rotated(&mut self, m: u32, rhs: &Self, e: i64) {
        *self += rhs * unit_root(m, e);
    }
    fn recip_rational(&self) -> Option<Self> {
        (self.norm() > 0.0).then(|| self.inv())
    }
    fn to_complex(&self) -> Complex64 {
        *self
    }
}
