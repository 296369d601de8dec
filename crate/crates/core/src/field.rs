//! Finite fields `F_q`, `q = p^r`, built deterministically from `(p, r)`.
//!
//! The modulus is the lexicographically smallest monic irreducible polynomial
//! of degree `r` over `F_p` and the generator is the smallest primitive
//! element, both under the ordering that compares coefficients starting from
//! the constant term. Two builds of the same `(p, r)` are therefore identical,
//! and elements can be named portably as `0` or `g^k`.
//!
//! Elements are stored as integer codes `c_0 + c_1 p + ... + c_{r-1} p^{r-1}`
//! of their polynomial-basis coefficient vectors. Dense discrete-log, power
//! and trace tables make every character evaluation a table lookup.

use std::fmt;

use crate::error::{Error, Result};

/// Largest field order accepted by [`FieldContext::new`].
pub const DEFAULT_MAX_ORDER: u64 = 1 << 16;

/// An element of `F_q` in canonical form.
///
/// The element remembers the order of its field so that mixing elements of
/// different fields is detected by the checked operations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElement {
    q: u32,
    code: u32,
}

impl FieldElement {
    /// Order of the field this element belongs to.
    pub fn field_order(self) -> u32 {
        self.q
    }

    /// Integer code `sum c_i p^i` of the coefficient vector.
    pub fn code(self) -> u32 {
        self.code
    }

    pub fn is_zero(self) -> bool {
        self.code == 0
    }
}

/// Immutable description of `F_{p^r}` together with its lookup tables.
#[derive(Clone)]
pub struct FieldContext {
    p: u32,
    r: u32,
    q: u32,
    modulus: Vec<u32>,
    generator: u32,
    /// `exp[j]` is the code of `g^j`, `0 <= j < q - 1`.
    exp: Vec<u32>,
    /// `log[code]` is the discrete log; `log[0]` is unused.
    log: Vec<u32>,
    trace: Vec<u32>,
}

impl fmt::Debug for FieldContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldContext")
            .field("p", &self.p)
            .field("r", &self.r)
            .field("q", &self.q)
            .field("modulus", &self.modulus)
            .field("generator", &self.coeffs_of_code(self.generator))
            .finish()
    }
}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Distinct prime factors of `n`, ascending.
pub(crate) fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Coefficients `(c_0, ..., c_{len-1})` of the `n`-th vector in the ordering
/// that compares `c_0` first.
fn lex_vector(mut n: u64, len: usize, p: u32) -> Vec<u32> {
    let mut out = vec![0; len];
    for slot in out.iter_mut().rev() {
        *slot = (n % p as u64) as u32;
        n /= p as u64;
    }
    out
}

/// Remainder of `a` modulo the monic polynomial `m` over `F_p`.
fn poly_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let deg = m.len() - 1;
    let mut a: Vec<u64> = a.iter().map(|&c| c as u64).collect();
    let p64 = p as u64;
    for i in (deg..a.len()).rev() {
        let c = a[i] % p64;
        if c == 0 {
            continue;
        }
        for (j, &mj) in m.iter().enumerate() {
            let idx = i - deg + j;
            a[idx] = (a[idx] + (p64 - c) * mj as u64) % p64;
        }
    }
    a.truncate(deg);
    a.into_iter().map(|c| (c % p64) as u32).collect()
}

fn poly_mulmod(a: &[u32], b: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let mut prod = vec![0u64; a.len() + b.len()];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + ai as u64 * bj as u64) % p as u64;
        }
    }
    let prod: Vec<u32> = prod.into_iter().map(|c| c as u32).collect();
    poly_rem(&prod, m, p)
}

fn poly_powmod(base: &[u32], mut e: u64, m: &[u32], p: u32) -> Vec<u32> {
    let deg = m.len() - 1;
    let mut result = vec![0; deg];
    result[0] = 1;
    let mut base = base.to_vec();
    while e > 0 {
        if e & 1 == 1 {
            result = poly_mulmod(&result, &base, m, p);
        }
        base = poly_mulmod(&base, &base, m, p);
        e >>= 1;
    }
    result
}

/// Trial division by every monic polynomial of degree `1..=deg/2`.
fn is_irreducible(m: &[u32], p: u32) -> bool {
    let deg = m.len() - 1;
    for d in 1..=deg / 2 {
        let count = (p as u64).pow(d as u32);
        for n in 0..count {
            let mut f = lex_vector(n, d, p);
            f.push(1);
            if poly_rem(m, &f, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

impl FieldContext {
    /// Builds `F_{p^r}` with the default order bound.
    pub fn new(p: u32, r: u32) -> Result<Self> {
        Self::with_max_order(p, r, DEFAULT_MAX_ORDER)
    }

    pub fn with_max_order(p: u32, r: u32, bound: u64) -> Result<Self> {
        if p == 2 {
            return Err(Error::EvenCharacteristic(p));
        }
        if !is_prime(p as u64) {
            return Err(Error::NotPrime(p));
        }
        if r == 0 {
            return Err(Error::ZeroDegree);
        }
        let q = (p as u64)
            .checked_pow(r)
            .filter(|&q| q <= bound && q <= u32::MAX as u64)
            .ok_or(Error::OrderTooLarge { p, r, bound })?;
        let q32 = q as u32;
        let deg = r as usize;

        let modulus = (0..q)
            .map(|n| {
                let mut m = lex_vector(n, deg, p);
                m.push(1);
                m
            })
            .find(|m| is_irreducible(m, p))
            .expect("an irreducible polynomial of every degree exists");

        let order = q - 1;
        let factors = prime_factors(order);
        let one = {
            let mut v = vec![0; deg];
            v[0] = 1;
            v
        };
        let generator = (1..q)
            .map(|n| lex_vector(n, deg, p))
            .find(|cand| {
                factors
                    .iter()
                    .all(|&l| poly_powmod(cand, order / l, &modulus, p) != one)
            })
            .expect("F_q^x is cyclic");

        let code_of = |c: &[u32]| c.iter().rev().fold(0u32, |acc, &d| acc * p + d);
        let mut exp = Vec::with_capacity(order as usize);
        let mut log = vec![u32::MAX; q as usize];
        let mut cur = one.clone();
        for j in 0..order as u32 {
            let code = code_of(&cur);
            debug_assert_eq!(log[code as usize], u32::MAX, "generator is not primitive");
            exp.push(code);
            log[code as usize] = j;
            cur = poly_mulmod(&cur, &generator, &modulus, p);
        }

        let mut ctx = FieldContext {
            p,
            r,
            q: q32,
            modulus,
            generator: code_of(&generator),
            exp,
            log,
            trace: Vec::new(),
        };

        // tr(a) = a + a^p + ... + a^{p^{r-1}}
        let mut trace = vec![0u32; q as usize];
        for code in 1..q32 {
            let j = ctx.log[code as usize] as u64;
            let mut acc = 0u32;
            let mut frob = 1u64;
            for _ in 0..r {
                let e = (j * frob) % order;
                acc = ctx.add_codes(acc, ctx.exp[e as usize]);
                frob = frob * p as u64 % order;
            }
            debug_assert!(acc < p, "trace must land in the prime field");
            trace[code as usize] = acc;
        }
        ctx.trace = trace;
        Ok(ctx)
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.r
    }

    pub fn order(&self) -> u32 {
        self.q
    }

    /// Order `q - 1` of the multiplicative group and of its character group.
    pub fn group_order(&self) -> u32 {
        self.q - 1
    }

    /// Monic modulus, coefficients from the constant term up.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn generator(&self) -> FieldElement {
        self.elem(self.generator)
    }

    fn elem(&self, code: u32) -> FieldElement {
        FieldElement { q: self.q, code }
    }

    pub fn zero(&self) -> FieldElement {
        self.elem(0)
    }

    pub fn one(&self) -> FieldElement {
        self.elem(1)
    }

    /// `g^k` for any integer `k`.
    pub fn pow_generator(&self, k: i64) -> FieldElement {
        let n = (self.q - 1) as i64;
        self.elem(self.exp[k.rem_euclid(n) as usize])
    }

    /// The element with the given polynomial-basis coefficients.
    pub fn from_coeffs(&self, coeffs: &[u32]) -> Result<FieldElement> {
        if coeffs.len() > self.r as usize {
            return Err(Error::ParseElement(format!("{coeffs:?}")));
        }
        let code = coeffs.iter().rev().fold(0u32, |acc, &c| acc * self.p + c % self.p);
        Ok(self.elem(code))
    }

    /// Embeds an integer through the prime subfield.
    pub fn from_int(&self, n: i64) -> FieldElement {
        self.elem(n.rem_euclid(self.p as i64) as u32)
    }

    fn coeffs_of_code(&self, mut code: u32) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.r as usize);
        for _ in 0..self.r {
            out.push(code % self.p);
            code /= self.p;
        }
        out
    }

    /// Polynomial-basis coefficients, constant term first.
    pub fn coeffs(&self, a: FieldElement) -> Vec<u32> {
        self.coeffs_of_code(a.code)
    }

    /// Rejects elements that belong to a different field.
    pub fn check(&self, a: FieldElement) -> Result<()> {
        if a.q == self.q {
            Ok(())
        } else {
            Err(Error::ContextMismatch {
                left: self.q,
                right: a.q,
            })
        }
    }

    fn add_codes(&self, a: u32, b: u32) -> u32 {
        if self.r == 1 {
            return (a + b) % self.p;
        }
        let (mut a, mut b) = (a, b);
        let mut out = 0;
        let mut place = 1;
        for _ in 0..self.r {
            out += ((a % self.p + b % self.p) % self.p) * place;
            a /= self.p;
            b /= self.p;
            place *= self.p;
        }
        out
    }

    fn neg_code(&self, a: u32) -> u32 {
        if self.r == 1 {
            return (self.p - a) % self.p;
        }
        let mut a = a;
        let mut out = 0;
        let mut place = 1;
        for _ in 0..self.r {
            out += ((self.p - a % self.p) % self.p) * place;
            a /= self.p;
            place *= self.p;
        }
        out
    }

    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.elem(self.add_codes(a.code, b.code))
    }

    pub fn neg(&self, a: FieldElement) -> FieldElement {
        self.elem(self.neg_code(a.code))
    }

    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if a.code == 0 || b.code == 0 {
            return self.zero();
        }
        let n = self.q - 1;
        let e = (self.log[a.code as usize] + self.log[b.code as usize]) % n;
        self.elem(self.exp[e as usize])
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement> {
        if a.code == 0 {
            return Err(Error::ZeroInverse);
        }
        let n = self.q - 1;
        let e = (n - self.log[a.code as usize]) % n;
        Ok(self.elem(self.exp[e as usize]))
    }

    pub fn div(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: FieldElement, e: u64) -> FieldElement {
        if e == 0 {
            return self.one();
        }
        if a.code == 0 {
            return self.zero();
        }
        let n = (self.q - 1) as u64;
        let j = (self.log[a.code as usize] as u64 * (e % n)) % n;
        self.elem(self.exp[j as usize])
    }

    /// `1 - a`, used throughout the hypergeometric arguments.
    pub fn one_minus(&self, a: FieldElement) -> FieldElement {
        self.sub(self.one(), a)
    }

    /// Absolute trace to `F_p`, as an integer in `[0, p - 1]`.
    pub fn trace(&self, a: FieldElement) -> u32 {
        self.trace[a.code as usize]
    }

    /// Discrete logarithm to the base of the fixed generator.
    pub fn dlog(&self, a: FieldElement) -> Result<u32> {
        if a.code == 0 {
            Err(Error::ZeroLog)
        } else {
            Ok(self.log[a.code as usize])
        }
    }

    /// Discrete log, or `None` for zero.
    pub fn dlog_opt(&self, a: FieldElement) -> Option<u32> {
        (a.code != 0).then(|| self.log[a.code as usize])
    }

    /// All elements in label order: `0, g^0, g^1, ..., g^{q-2}`.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        std::iter::once(self.zero()).chain(self.exp.iter().map(|&c| self.elem(c)))
    }

    /// Nonzero elements `g^0, ..., g^{q-2}`.
    pub fn units(&self) -> impl Iterator<Item = FieldElement> + '_ {
        self.exp.iter().map(|&c| self.elem(c))
    }

    /// Position of `a` in [`elements`](Self::elements).
    pub fn label_index(&self, a: FieldElement) -> u32 {
        self.dlog_opt(a).map_or(0, |j| j + 1)
    }

    pub fn element_at(&self, label_index: u32) -> FieldElement {
        if label_index == 0 {
            self.zero()
        } else {
            self.elem(self.exp[(label_index - 1) as usize])
        }
    }

    /// Portable name of an element: `"0"` or `"g^k"`.
    pub fn label(&self, a: FieldElement) -> String {
        match self.dlog_opt(a) {
            None => "0".to_string(),
            Some(k) => format!("g^{k}"),
        }
    }

    /// Inverse of [`label`](Self::label). Exponents are reduced mod `q - 1`.
    pub fn parse_label(&self, s: &str) -> Result<FieldElement> {
        let s = s.trim();
        if s == "0" {
            return Ok(self.zero());
        }
        let k = s
            .strip_prefix("g^")
            .and_then(|k| k.trim().parse::<i64>().ok())
            .ok_or_else(|| Error::ParseElement(s.to_string()))?;
        Ok(self.pow_generator(k))
    }

    /// Human-readable polynomial form of an element in the variable `t`.
    pub fn poly_string(&self, a: FieldElement) -> String {
        poly_to_string(&self.coeffs(a), "t")
    }

    /// Human-readable form of the modulus in the variable `x`.
    pub fn modulus_string(&self) -> String {
        poly_to_string(&self.modulus, "x")
    }
}

fn poly_to_string(coeffs: &[u32], var: &str) -> String {
    let mut terms = Vec::new();
    for (i, &c) in coeffs.iter().enumerate().rev() {
        if c == 0 {
            continue;
        }
        let mono = match i {
            0 => String::new(),
            1 => var.to_string(),
            _ => format!("{var}^{i}"),
        };
        terms.push(match (c, i) {
            (_, 0) => c.to_string(),
            (1, _) => mono,
            _ => format!("{c}{mono}"),
        });
    }
    if terms.is_empty() {
        "0".to_string()
    } else {
        terms.join(" + ")
    }
}
