//! Finite-field Appell functions: the character-sum forms F1, F2, F3 and the
//! Gauss-sum forms F1*, F2*, F3*, F4*.
//!
//! Every starred kernel factors as `P[psi chi] Q[psi] R[chi]`, so a
//! [`StarKernel`] is built with two products per coefficient and evaluated at
//! any `(x, y)` by rotations alone.

use std::fmt;
use std::str::FromStr;

use crate::chars::MultChar;
use crate::cyclo::Scalar;
use crate::error::{Error, Result};
use crate::field::FieldElement;
use crate::sums::CharSums;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AppellKind {
    F1,
    F2,
    F3,
    F1Star,
    F2Star,
    F3Star,
    F4Star,
}

impl AppellKind {
    pub const ALL: [AppellKind; 7] = [
        AppellKind::F1,
        AppellKind::F2,
        AppellKind::F3,
        AppellKind::F1Star,
        AppellKind::F2Star,
        AppellKind::F3Star,
        AppellKind::F4Star,
    ];

    /// Character roles in argument order.
    pub fn roles(self) -> &'static [&'static str] {
        match self {
            AppellKind::F1 | AppellKind::F1Star => &["A", "B", "B'", "C"],
            AppellKind::F2 | AppellKind::F2Star => &["A", "B", "B'", "C", "C'"],
            AppellKind::F3 | AppellKind::F3Star => &["A", "A'", "B", "B'", "C"],
            AppellKind::F4Star => &["A", "B", "C", "C'"],
        }
    }

    pub fn arity(self) -> usize {
        self.roles().len()
    }

    pub fn is_star(self) -> bool {
        !matches!(self, AppellKind::F1 | AppellKind::F2 | AppellKind::F3)
    }

    pub fn name(self) -> &'static str {
        match self {
            AppellKind::F1 => "f1",
            AppellKind::F2 => "f2",
            AppellKind::F3 => "f3",
            AppellKind::F1Star => "f1star",
            AppellKind::F2Star => "f2star",
            AppellKind::F3Star => "f3star",
            AppellKind::F4Star => "f4star",
        }
    }
}

impl fmt::Display for AppellKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AppellKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AppellKind::ALL
            .into_iter()
            .find(|k| k.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::Arity(format!("unknown Appell function {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AppellSpec {
    pub kind: AppellKind,
    pub chars: Vec<MultChar>,
    pub x: FieldElement,
    pub y: FieldElement,
}

impl AppellSpec {
    pub fn new(kind: AppellKind, chars: Vec<MultChar>, x: FieldElement, y: FieldElement) -> Result<Self> {
        if chars.len() != kind.arity() {
            return Err(Error::Arity(format!(
                "{kind} takes {} characters ({}), got {}",
                kind.arity(),
                kind.roles().join(", "),
                chars.len()
            )));
        }
        let q = x.field_order();
        if y.field_order() != q {
            return Err(Error::ContextMismatch {
                left: q,
                right: y.field_order(),
            });
        }
        if let Some(c) = chars.iter().find(|c| c.field_order() != q) {
            return Err(Error::ContextMismatch {
                left: q,
                right: c.field_order(),
            });
        }
        Ok(AppellSpec { kind, chars, x, y })
    }

    fn indices(&self) -> Vec<u32> {
        self.chars.iter().map(|c| c.index()).collect()
    }
}

/// Evaluates a spec of either family.
pub fn appell<V: Scalar>(s: &CharSums<V>, spec: &AppellSpec) -> Result<V> {
    if spec.kind.is_star() {
        appell_star(s, spec)
    } else {
        appell_fieldsum(s, spec)
    }
}

fn check<V: Scalar>(s: &CharSums<V>, spec: &AppellSpec) -> Result<()> {
    s.field().check(spec.x)?;
    s.field().check(spec.y)
}

pub fn appell_fieldsum<V: Scalar>(s: &CharSums<V>, spec: &AppellSpec) -> Result<V> {
    check(s, spec)?;
    let c = spec.indices();
    Ok(match spec.kind {
        AppellKind::F1 => f1_fieldsum(s, c[0], c[1], c[2], c[3], spec.x, spec.y),
        AppellKind::F2 => f2_fieldsum(s, c[0], c[1], c[2], c[3], c[4], spec.x, spec.y),
        AppellKind::F3 => f3_fieldsum(s, c[0], c[1], c[2], c[3], c[4], spec.x, spec.y),
        kind => return Err(Error::Arity(format!("{kind} is not a field-sum function"))),
    })
}

/// Adds `zeta_m^{sum of exponents}` to the histogram unless a factor vanishes.
#[inline]
fn tally(counts: &mut [i64], m: i64, exps: &[Option<i64>]) {
    let mut e = 0;
    for x in exps {
        match x {
            Some(v) => e += v,
            None => return,
        }
    }
    counts[(e % m) as usize] += 1;
}

/// `eps(xy) AC(-1) sum_u A(u) A-bar C(1-u) B-bar(1-ux) B'-bar(1-uy)`.
pub fn f1_fieldsum<V: Scalar>(s: &CharSums<V>, a: u32, b: u32, b2: u32, c: u32, x: FieldElement, y: FieldElement) -> V {
    let f = s.field();
    if x.is_zero() || y.is_zero() {
        return s.zero();
    }
    let m = s.m();
    let (ac, nb, nb2) = (s.idx(c as i64 - a as i64), s.idx(-(b as i64)), s.idx(-(b2 as i64)));
    let mut counts = vec![0i64; m as usize];
    for u in f.units() {
        tally(
            &mut counts,
            m as i64,
            &[
                f.char_exponent(a, u),
                f.char_exponent(ac, f.one_minus(u)),
                f.char_exponent(nb, f.one_minus(f.mul(u, x))),
                f.char_exponent(nb2, f.one_minus(f.mul(u, y))),
            ],
        );
    }
    V::from_counts(m, &counts).scale(s.sign(a + c), 1)
}

/// `eps(xy) BB'CC'(-1) sum_{u,v} B(u) B'(v) B-bar C(1-u) B'-bar C'(1-v) A-bar(1-ux-vy)`.
#[allow(clippy::too_many_arguments)]
pub fn f2_fieldsum<V: Scalar>(
    s: &CharSums<V>,
    a: u32,
    b: u32,
    b2: u32,
    c: u32,
    c2: u32,
    x: FieldElement,
    y: FieldElement,
) -> V {
    let f = s.field();
    if x.is_zero() || y.is_zero() {
        return s.zero();
    }
    let m = s.m();
    let (na, bc, bc2) = (
        s.idx(-(a as i64)),
        s.idx(c as i64 - b as i64),
        s.idx(c2 as i64 - b2 as i64),
    );
    let mut counts = vec![0i64; m as usize];
    for u in f.units() {
        let eu = [f.char_exponent(b, u), f.char_exponent(bc, f.one_minus(u))];
        if eu[1].is_none() {
            continue;
        }
        let ux = f.mul(u, x);
        for v in f.units() {
            let w = f.sub(f.one_minus(ux), f.mul(v, y));
            tally(
                &mut counts,
                m as i64,
                &[
                    eu[0],
                    eu[1],
                    f.char_exponent(b2, v),
                    f.char_exponent(bc2, f.one_minus(v)),
                    f.char_exponent(na, w),
                ],
            );
        }
    }
    V::from_counts(m, &counts).scale(s.sign(b + b2 + c + c2), 1)
}

/// `eps(xy) BB'(-1) sum_{u,v} B(u) B'(v) C B-bar B'-bar(1-u-v) A-bar(1-ux) A'-bar(1-vy)`.
#[allow(clippy::too_many_arguments)]
pub fn f3_fieldsum<V: Scalar>(
    s: &CharSums<V>,
    a: u32,
    a2: u32,
    b: u32,
    b2: u32,
    c: u32,
    x: FieldElement,
    y: FieldElement,
) -> V {
    let f = s.field();
    if x.is_zero() || y.is_zero() {
        return s.zero();
    }
    let m = s.m();
    let cbb = s.idx(c as i64 - b as i64 - b2 as i64);
    let (na, na2) = (s.idx(-(a as i64)), s.idx(-(a2 as i64)));
    let mut counts = vec![0i64; m as usize];
    for u in f.units() {
        let eu = [f.char_exponent(b, u), f.char_exponent(na, f.one_minus(f.mul(u, x)))];
        if eu[1].is_none() {
            continue;
        }
        let one_u = f.one_minus(u);
        for v in f.units() {
            tally(
                &mut counts,
                m as i64,
                &[
                    eu[0],
                    eu[1],
                    f.char_exponent(b2, v),
                    f.char_exponent(cbb, f.sub(one_u, v)),
                    f.char_exponent(na2, f.one_minus(f.mul(v, y))),
                ],
            );
        }
    }
    V::from_counts(m, &counts).scale(s.sign(b + b2), 1)
}

/// Coefficients `K[psi][chi]` of a starred function, normalization included:
/// `F*(x, y) = sum_{psi,chi} K[psi][chi] psi(x) chi(y)`.
#[derive(Clone, Debug)]
pub struct StarKernel<V> {
    n: u32,
    coeffs: Vec<V>,
}

impl<V: Scalar> StarKernel<V> {
    pub fn new(s: &CharSums<V>, kind: AppellKind, chars: &[u32]) -> Result<Self> {
        if !kind.is_star() {
            return Err(Error::Arity(format!("{kind} has no Gauss-sum kernel")));
        }
        if chars.len() != kind.arity() {
            return Err(Error::Arity(format!(
                "{kind} takes {} characters, got {}",
                kind.arity(),
                chars.len()
            )));
        }
        let n = s.n();
        let i = |k: i64| s.idx(k);
        let c = |j: usize| chars[j] as i64;
        let g = |k: i64| s.g(i(k)).clone();
        let gi = |k: i64| s.g_inv(i(k)).clone();
        let pair = |a: i64, b: i64| s.gauss_pair(i(a), i(b)).into_owned();
        // P over t = psi chi, Q over psi, R over chi, and the constant.
        let (p, q, r, norm): (Vec<V>, Vec<V>, Vec<V>, V) = match kind {
            AppellKind::F1Star => {
                // g(A chi psi) g(C-bar chi-bar psi-bar), g(B psi) g(psi-bar), g(B' chi) g(chi-bar)
                let (a, b, b2, cc) = (c(0), c(1), c(2), c(3));
                (
                    tab(n, |t| pair(a + t, -cc - t)),
                    tab(n, |k| pair(b + k, -k)),
                    tab(n, |k| pair(b2 + k, -k)),
                    gi(a).mul(&gi(b)).mul(&gi(b2)).mul(&gi(-cc)),
                )
            }
            AppellKind::F2Star => {
                let (a, b, b2, cc, cc2) = (c(0), c(1), c(2), c(3), c(4));
                (
                    tab(n, |t| g(a + t)),
                    tab(n, |k| pair(b + k, -cc - k).mul(s.g(i(-k)))),
                    tab(n, |k| pair(b2 + k, -cc2 - k).mul(s.g(i(-k)))),
                    gi(a).mul(&gi(b)).mul(&gi(b2)).mul(&gi(-cc)).mul(&gi(-cc2)),
                )
            }
            AppellKind::F3Star => {
                let (a, a2, b, b2, cc) = (c(0), c(1), c(2), c(3), c(4));
                (
                    tab(n, |t| g(-cc - t)),
                    tab(n, |k| pair(a + k, b + k).mul(s.g(i(-k)))),
                    tab(n, |k| pair(a2 + k, b2 + k).mul(s.g(i(-k)))),
                    gi(a).mul(&gi(a2)).mul(&gi(b)).mul(&gi(b2)).mul(&gi(-cc)),
                )
            }
            AppellKind::F4Star => {
                let (a, b, cc, cc2) = (c(0), c(1), c(2), c(3));
                (
                    tab(n, |t| pair(a + t, b + t)),
                    tab(n, |k| pair(-cc - k, -k)),
                    tab(n, |k| pair(-cc2 - k, -k)),
                    gi(a).mul(&gi(b)).mul(&gi(-cc)).mul(&gi(-cc2)),
                )
            }
            _ => unreachable!(),
        };
        let norm = norm.scale(1, n as i64 * n as i64);
        let q: Vec<V> = q.iter().map(|v| v.mul(&norm)).collect();
        Ok(Self::from_factors(n, &p, &q, &r))
    }

    /// `K[psi][chi] = p[psi chi] q[psi] r[chi]`.
    pub fn from_factors(n: u32, p: &[V], q: &[V], r: &[V]) -> Self {
        let mut coeffs = Vec::with_capacity((n * n) as usize);
        for psi in 0..n {
            for chi in 0..n {
                coeffs.push(
                    p[((psi + chi) % n) as usize]
                        .mul(&r[chi as usize])
                        .mul(&q[psi as usize]),
                );
            }
        }
        StarKernel { n, coeffs }
    }

    /// Wraps an explicit coefficient table in row-major `(psi, chi)` order.
    pub fn from_coeffs(n: u32, coeffs: Vec<V>) -> Self {
        assert_eq!(coeffs.len(), (n * n) as usize);
        StarKernel { n, coeffs }
    }

    pub fn coeff(&self, psi: u32, chi: u32) -> &V {
        &self.coeffs[(psi * self.n + chi) as usize]
    }

    /// `sum K[psi][chi] psi(x) chi(y)`.
    pub fn eval(&self, s: &CharSums<V>, x: FieldElement, y: FieldElement) -> V {
        let f = s.field();
        let mut acc = s.zero();
        let (Some(lx), Some(ly)) = (f.dlog_opt(x), f.dlog_opt(y)) else {
            return acc;
        };
        let n = self.n as u64;
        let p = f.characteristic() as i64;
        for psi in 0..n {
            for chi in 0..n {
                let e = (psi * lx as u64 + chi * ly as u64) % n;
                acc.add_rotated(s.m(), &self.coeffs[(psi * n + chi) as usize], p * e as i64);
            }
        }
        acc
    }
}

impl<V: Scalar> StarKernel<V> {
    /// Values at every pair of units at once: two passes of `n` rotations
    /// per coefficient instead of `n^2` per evaluated pair.
    pub fn grid(&self, s: &CharSums<V>) -> KernelGrid<V> {
        let n = self.n as u64;
        let (m, p) = (s.m(), s.field().characteristic() as i64);
        let mut rows = Vec::with_capacity((n * n) as usize);
        for psi in 0..n {
            for ly in 0..n {
                let mut acc = s.zero();
                for chi in 0..n {
                    acc.add_rotated(m, &self.coeffs[(psi * n + chi) as usize], p * ((chi * ly) % n) as i64);
                }
                rows.push(acc);
            }
        }
        let mut values = Vec::with_capacity((n * n) as usize);
        for lx in 0..n {
            for ly in 0..n {
                let mut acc = s.zero();
                for psi in 0..n {
                    acc.add_rotated(m, &rows[(psi * n + ly) as usize], p * ((psi * lx) % n) as i64);
                }
                values.push(acc);
            }
        }
        KernelGrid { n: self.n, values }
    }
}

/// A starred function tabulated on `F_q^x x F_q^x` by discrete logarithm.
#[derive(Clone, Debug)]
pub struct KernelGrid<V> {
    n: u32,
    values: Vec<V>,
}

impl<V: Scalar> KernelGrid<V> {
    pub fn eval(&self, s: &CharSums<V>, x: FieldElement, y: FieldElement) -> V {
        let f = s.field();
        match (f.dlog_opt(x), f.dlog_opt(y)) {
            (Some(lx), Some(ly)) => self.values[(lx * self.n + ly) as usize].clone(),
            _ => s.zero(),
        }
    }
}

fn tab<V>(n: u32, f: impl Fn(i64) -> V) -> Vec<V> {
    (0..n as i64).map(f).collect()
}

pub fn appell_star<V: Scalar>(s: &CharSums<V>, spec: &AppellSpec) -> Result<V> {
    check(s, spec)?;
    if spec.x.is_zero() || spec.y.is_zero() {
        return Ok(s.zero());
    }
    Ok(StarKernel::new(s, spec.kind, &spec.indices())?.eval(s, spec.x, spec.y))
}

/// Direct `(psi, chi)` summation of a starred kernel with one product per
/// Gauss-sum factor. Slow; the reference for [`StarKernel`].
pub fn appell_star_direct<V: Scalar>(
    s: &CharSums<V>,
    kind: AppellKind,
    chars: &[u32],
    x: FieldElement,
    y: FieldElement,
) -> V {
    let n = s.n() as i64;
    let c = |j: usize| chars[j] as i64;
    let mut acc = s.zero();
    let f = s.field();
    let (Some(_), Some(_)) = (f.dlog_opt(x), f.dlog_opt(y)) else {
        return acc;
    };
    // (numerator Gauss-sum arguments, denominator arguments) per (psi, chi).
    let terms = |psi: i64, chi: i64| -> (Vec<i64>, Vec<i64>) {
        match kind {
            AppellKind::F1Star => (
                vec![c(0) + chi + psi, c(1) + psi, c(2) + chi, -c(3) - chi - psi, -psi, -chi],
                vec![c(0), c(1), c(2), -c(3)],
            ),
            AppellKind::F2Star => (
                vec![
                    c(0) + chi + psi,
                    c(1) + psi,
                    c(2) + chi,
                    -c(3) - psi,
                    -c(4) - chi,
                    -psi,
                    -chi,
                ],
                vec![c(0), c(1), c(2), -c(3), -c(4)],
            ),
            AppellKind::F3Star => (
                vec![
                    c(0) + psi,
                    c(1) + chi,
                    c(2) + psi,
                    c(3) + chi,
                    -c(4) - chi - psi,
                    -psi,
                    -chi,
                ],
                vec![c(0), c(1), c(2), c(3), -c(4)],
            ),
            AppellKind::F4Star => (
                vec![c(0) + chi + psi, c(1) + chi + psi, -c(2) - psi, -c(3) - chi, -psi, -chi],
                vec![c(0), c(1), -c(2), -c(3)],
            ),
            _ => panic!("{kind} has no Gauss-sum kernel"),
        }
    };
    for psi in 0..n {
        for chi in 0..n {
            let (num, den) = terms(psi, chi);
            let mut t = s.one();
            for k in num {
                t = t.mul(s.g(s.idx(k)));
            }
            for k in den {
                t = t.mul(s.g_inv(s.idx(k)));
            }
            t = t.mul(&s.chi(psi as u32, x)).mul(&s.chi(chi as u32, y));
            acc.add_assign(&t);
        }
    }
    acc.scale(1, n * n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclo::CycloNumber;
    use crate::field::FieldContext;
    use crate::sums::ExactSums;
    use std::sync::Arc;

    fn sums(p: u32, r: u32) -> ExactSums {
        ExactSums::new(Arc::new(FieldContext::new(p, r).unwrap()))
    }

    fn spec(s: &ExactSums, kind: AppellKind, chars: &[u32], x: FieldElement, y: FieldElement) -> AppellSpec {
        let f = s.field();
        AppellSpec::new(kind, chars.iter().map(|&k| f.character(k as i64)).collect(), x, y).unwrap()
    }

    #[test]
    fn kernel_matches_direct_sum() {
        let s = sums(5, 1);
        let f = s.field();
        let cases: [(AppellKind, &[u32]); 4] = [
            (AppellKind::F1Star, &[1, 2, 3, 2]),
            (AppellKind::F2Star, &[1, 0, 3, 2, 1]),
            (AppellKind::F3Star, &[3, 1, 2, 2, 0]),
            (AppellKind::F4Star, &[1, 2, 3, 1]),
        ];
        for (kind, chars) in cases {
            let k = StarKernel::new(&s, kind, chars).unwrap();
            for x in f.units() {
                for y in f.units() {
                    assert_eq!(k.eval(&s, x, y), appell_star_direct(&s, kind, chars, x, y), "{kind}");
                }
            }
        }
    }

    #[test]
    fn grid_matches_pointwise() {
        let s = sums(7, 1);
        let f = s.field();
        let k = StarKernel::new(&s, AppellKind::F2Star, &[1, 4, 3, 2, 5]).unwrap();
        let grid = k.grid(&s);
        for x in f.elements() {
            for y in f.elements() {
                assert_eq!(grid.eval(&s, x, y), k.eval(&s, x, y));
            }
        }
    }

    #[test]
    fn zero_arguments_annihilate() {
        let s = sums(5, 1);
        let f = s.field();
        let (zero, x) = (f.zero(), f.from_int(2));
        for kind in AppellKind::ALL {
            let chars = vec![1; kind.arity()];
            for (a, b) in [(zero, x), (x, zero), (zero, zero)] {
                let v: CycloNumber = appell(&s, &spec(&s, kind, &chars, a, b)).unwrap();
                assert!(v.is_zero(), "{kind}");
            }
        }
    }

    #[test]
    fn f1_quadratic_example() {
        let s = sums(5, 1);
        let f = s.field();
        let (x, y) = (f.from_int(2), f.from_int(3));
        // Direct enumeration over u with phi the quadratic character.
        let phi = f.quadratic_character();
        let mut direct = CycloNumber::zero(s.m());
        for u in f.elements() {
            let mut t = f.eval_mult(phi, u).unwrap();
            t = t.mul(&f.eval_mult(f.trivial_character(), f.one_minus(u)).unwrap());
            t = t.mul(&f.eval_mult(phi, f.one_minus(f.mul(u, x))).unwrap());
            t = t.mul(&f.eval_mult(phi, f.one_minus(f.mul(u, y))).unwrap());
            direct = direct.add(&t);
        }
        let v = appell_fieldsum(&s, &spec(&s, AppellKind::F1, &[2, 2, 2, 2], x, y)).unwrap();
        assert_eq!(v, direct);
    }

    #[test]
    fn symmetries_q5() {
        let s = sums(5, 1);
        let f = s.field();
        let n = s.n();
        let xs: Vec<_> = f.elements().collect();
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in [0, 1, 3] {
                        let f4 = StarKernel::new(&s, AppellKind::F4Star, &[a, b, c, d]).unwrap();
                        let f4_sw = StarKernel::new(&s, AppellKind::F4Star, &[a, b, d, c]).unwrap();
                        let f4_ab = StarKernel::new(&s, AppellKind::F4Star, &[b, a, c, d]).unwrap();
                        let f1 = StarKernel::new(&s, AppellKind::F1Star, &[a, b, c, d]).unwrap();
                        let f1_sw = StarKernel::new(&s, AppellKind::F1Star, &[a, c, b, d]).unwrap();
                        let f2 = StarKernel::new(&s, AppellKind::F2Star, &[a, b, c, d, 1]).unwrap();
                        let f2_sw = StarKernel::new(&s, AppellKind::F2Star, &[a, c, b, 1, d]).unwrap();
                        for &x in &xs {
                            for &y in &xs {
                                assert_eq!(f4.eval(&s, x, y), f4_sw.eval(&s, y, x));
                                assert_eq!(f4.eval(&s, x, y), f4_ab.eval(&s, x, y));
                                assert_eq!(f1.eval(&s, x, y), f1_sw.eval(&s, y, x));
                                assert_eq!(f2.eval(&s, x, y), f2_sw.eval(&s, y, x));
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn f3_fieldsum_symmetry_q5() {
        let s = sums(5, 1);
        let f = s.field();
        for chars in [[1u32, 2, 3, 0, 2], [2, 2, 1, 1, 3], [0, 3, 3, 2, 1]] {
            let [a, a2, b, b2, c] = chars;
            for x in f.units() {
                for y in f.units() {
                    assert_eq!(
                        f3_fieldsum(&s, a, a2, b, b2, c, x, y),
                        f3_fieldsum(&s, a2, a, b2, b, c, y, x)
                    );
                }
            }
        }
    }

    #[test]
    fn spec_arity_is_checked() {
        let f = FieldContext::new(5, 1).unwrap();
        let err = AppellSpec::new(AppellKind::F2, vec![f.character(1); 4], f.one(), f.one());
        assert!(matches!(err, Err(Error::Arity(_))));
        assert_eq!("F4STAR".parse::<AppellKind>().unwrap(), AppellKind::F4Star);
    }
}
