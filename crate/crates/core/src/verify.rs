//! Exact verification of the character-sum identities.
//!
//! A suite names its character and element parameters, an admissibility
//! predicate, and for each character tuple a checker returning both sides of
//! its identity at an element tuple. Suites run exhaustively or on a seeded
//! uniform sample of admissible tuples; results always come back in canonical
//! tuple order so reports do not depend on the worker count.

use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::appell::{AppellKind, KernelGrid, StarKernel};
use crate::cyclo::CycloNumber;
use crate::error::{Error, Result};
use crate::field::{FieldContext, FieldElement};
use crate::hyperff::{
    eval_kernel, f21_star_at_one, f21_star_special, greene_2f1_fieldsum, greene_nfn_binomsum_idx, mccarthy_kernel,
    SpecialCase,
};
use crate::sums::{jacobi, ExactSums};

/// Default switchover between exhaustive and sampled runs in [`run_all`].
pub const DEFAULT_BUDGET: u64 = 1_000_000;
pub const DEFAULT_SAMPLES: usize = 1000;
/// Violation records kept per report; the count is always exact.
pub const MAX_RECORDED_VIOLATIONS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SuiteId {
    LemmaG1,
    LemmaGj1,
    LemmaG2,
    LemmaG3,
    LemmaG7,
    BinomB3,
    BinomThm1,
    BinomThm2,
    Orthogonality,
    Prop25,
    Rel1,
    Rel2,
    Rel3,
    Rel4,
    Rel5,
    GreeneRouteEq,
    Thm1,
    Thm2a,
    Thm2b,
    Thm3,
    Thm3Variant,
}

impl SuiteId {
    pub const ALL: [SuiteId; 21] = [
        SuiteId::LemmaG1,
        SuiteId::LemmaGj1,
        SuiteId::LemmaG2,
        SuiteId::LemmaG3,
        SuiteId::LemmaG7,
        SuiteId::BinomB3,
        SuiteId::BinomThm1,
        SuiteId::BinomThm2,
        SuiteId::Orthogonality,
        SuiteId::Prop25,
        SuiteId::Rel1,
        SuiteId::Rel2,
        SuiteId::Rel3,
        SuiteId::Rel4,
        SuiteId::Rel5,
        SuiteId::GreeneRouteEq,
        SuiteId::Thm1,
        SuiteId::Thm2a,
        SuiteId::Thm2b,
        SuiteId::Thm3,
        SuiteId::Thm3Variant,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SuiteId::LemmaG1 => "lemma_g1",
            SuiteId::LemmaGj1 => "lemma_gj1",
            SuiteId::LemmaG2 => "lemma_g2",
            SuiteId::LemmaG3 => "lemma_g3",
            SuiteId::LemmaG7 => "lemma_g7",
            SuiteId::BinomB3 => "binom_b3",
            SuiteId::BinomThm1 => "binom_thm1",
            SuiteId::BinomThm2 => "binom_thm2",
            SuiteId::Orthogonality => "orthogonality",
            SuiteId::Prop25 => "prop25",
            SuiteId::Rel1 => "rel1",
            SuiteId::Rel2 => "rel2",
            SuiteId::Rel3 => "rel3",
            SuiteId::Rel4 => "rel4",
            SuiteId::Rel5 => "rel5",
            SuiteId::GreeneRouteEq => "greene_route_eq",
            SuiteId::Thm1 => "thm1",
            SuiteId::Thm2a => "thm2a",
            SuiteId::Thm2b => "thm2b",
            SuiteId::Thm3 => "thm3",
            SuiteId::Thm3Variant => "thm3_variant",
        }
    }

    /// Names of the character parameters, then of the element parameters.
    pub fn roles(self) -> (&'static [&'static str], &'static [&'static str]) {
        match self {
            SuiteId::Orthogonality => (&[], &["x"]),
            SuiteId::LemmaG1 => (&["chi"], &[]),
            SuiteId::LemmaGj1 | SuiteId::BinomB3 => (&["A", "B"], &[]),
            SuiteId::LemmaG2 => (&["A", "B", "C", "D"], &[]),
            SuiteId::LemmaG3 => (&["A", "B", "C"], &[]),
            SuiteId::LemmaG7 | SuiteId::BinomThm1 => (&["A"], &["x"]),
            SuiteId::BinomThm2 | SuiteId::Rel5 => (&["A", "B"], &["x"]),
            SuiteId::Prop25 => (&["A0", "A1", "B1"], &["x"]),
            SuiteId::Rel1 => (&["A1", "B1"], &["x"]),
            SuiteId::Rel2 => (&["A0", "A1"], &["x"]),
            SuiteId::Rel3 | SuiteId::Rel4 | SuiteId::GreeneRouteEq => (&["A", "B", "C"], &["x"]),
            SuiteId::Thm1 => (&["A", "B", "C", "C'"], &["x", "y"]),
            SuiteId::Thm2a | SuiteId::Thm2b | SuiteId::Thm3 | SuiteId::Thm3Variant => (&["A", "B", "C"], &["x", "y"]),
        }
    }

    /// Human-readable identity, printed in reports.
    pub fn description(self) -> &'static str {
        match self {
            SuiteId::LemmaG1 => "g(chi) g(chi-bar) = q chi(-1) - (q-1) delta(chi)",
            SuiteId::LemmaGj1 => "J(A,B) = g(A) g(B) / g(AB) + (q-1) B(-1) delta(AB)",
            SuiteId::LemmaG2 => "four-character Gauss-sum product sum",
            SuiteId::LemmaG3 => "2F1*(A,B;C|1) closed form",
            SuiteId::LemmaG7 => "A-bar(1-x) as a Gauss-sum character sum, x != 0, 1",
            SuiteId::BinomB3 => "(A|B) = B(-1) (B A-bar|B)",
            SuiteId::BinomThm1 => "A-bar(1-x) = delta(x) + q/(q-1) sum (A chi|chi) chi(x)",
            SuiteId::BinomThm2 => "B-bar(x) A-bar B(1-x) = q/(q-1) sum (A chi|B chi) chi(x)",
            SuiteId::Orthogonality => "sum_chi chi(x) = (q-1) delta(1-x)",
            SuiteId::Prop25 => "McCarthy 2F1* = (A1|B1)^{-1} Greene 2F1",
            SuiteId::Rel1 => "2F1*(eps,A1;B1|x) closed form",
            SuiteId::Rel2 => "2F1*(A0,A1;A1|x) closed form",
            SuiteId::Rel3 => "2F1*(A,B;C|x) = A-bar(1-x) 2F1*(A,B-bar C;C|-x/(1-x))",
            SuiteId::Rel4 => "2F1*(A,B;C|x) = (AB)-bar C(1-x) 2F1*(C A-bar,C B-bar;C|x)",
            SuiteId::Rel5 => "2F1*(A,B;A|x) closed form",
            SuiteId::GreeneRouteEq => "Greene 2F1 character sum = binomial sum",
            SuiteId::Thm1 => "F4* at (-x,-y)/((1-x)(1-y)) as a double sum of 2F1*(1) products",
            SuiteId::Thm2a => "F4*(A;B;C,AB C-bar) = product of 2F1* + correction terms",
            SuiteId::Thm2b => "F4*(A;B;C,AB C-bar) = product of 2F1*, xy != 1, A != C",
            SuiteId::Thm3 => "F4*(A;B;C,B) via F1*(A; B-bar C, A C-bar; C-bar; x, xy)",
            SuiteId::Thm3Variant => "F4*(A;B;C,B) via F1*(A; B-bar C, A C-bar; C; x, xy)",
        }
    }
}

impl fmt::Display for SuiteId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SuiteId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SuiteId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::UnknownSuite(s.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Exhaustive,
    Sample,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Exhaustive => "exhaustive",
            Mode::Sample => "sample",
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exhaustive" => Ok(Mode::Exhaustive),
            "sample" => Ok(Mode::Sample),
            _ => Err(Error::SamplingConfig("mode \"exhaustive\" or \"sample\"")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Verified,
    Violated,
    Vacuous,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Verified => "verified",
            Status::Violated => "violated",
            Status::Vacuous => "vacuous",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    /// `(role, label)` in role order.
    pub params: Vec<(String, String)>,
    pub lhs: CycloNumber,
    pub rhs: CycloNumber,
}

impl Violation {
    pub fn difference(&self) -> CycloNumber {
        self.lhs.sub(&self.rhs)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerificationReport {
    pub suite: SuiteId,
    pub p: u32,
    pub r: u32,
    pub q: u32,
    pub mode: Mode,
    pub seed: u64,
    pub tuples_tested: u64,
    pub violation_count: u64,
    /// The first [`MAX_RECORDED_VIOLATIONS`] violations in tuple order.
    pub violations: Vec<Violation>,
    pub elapsed_s: f64,
}

impl VerificationReport {
    pub fn status(&self) -> Status {
        if self.tuples_tested == 0 {
            Status::Vacuous
        } else if self.violation_count == 0 {
            Status::Verified
        } else {
            Status::Violated
        }
    }

    pub fn passed(&self) -> bool {
        self.status() != Status::Violated
    }

    /// The JSON object of this report. Timings are wall-clock and therefore
    /// only included on request; otherwise `elapsed_s` is `null` and the
    /// output depends on nothing but the run parameters.
    pub fn to_json(&self, timings: bool) -> Value {
        let violations: Vec<Value> = self
            .violations
            .iter()
            .map(|v| {
                let params: serde_json::Map<String, Value> = v
                    .params
                    .iter()
                    .map(|(k, l)| (k.clone(), Value::String(l.clone())))
                    .collect();
                json!({
                    "params": params,
                    "lhs": cyclo_json(&v.lhs),
                    "rhs": cyclo_json(&v.rhs),
                    "difference": cyclo_json(&v.difference()),
                })
            })
            .collect();
        json!({
            "suite": self.suite.name(),
            "identity": self.suite.description(),
            "p": self.p,
            "r": self.r,
            "q": self.q,
            "mode": self.mode.name(),
            "seed": self.seed,
            "tuples_tested": self.tuples_tested,
            "status": self.status().name(),
            "violation_count": self.violation_count,
            "violations": violations,
            "elapsed_s": if timings { json!(self.elapsed_s) } else { Value::Null },
            "tool_version": env!("CARGO_PKG_VERSION"),
        })
    }
}

/// `{"m": m, "terms": [[e, "c"], ...]}` over the canonical basis
/// `zeta_m^0, ..., zeta_m^{phi(m)-1}`.
pub fn cyclo_json(z: &CycloNumber) -> Value {
    let terms: Vec<Value> = z
        .canonical_terms()
        .into_iter()
        .map(|(e, n, d)| {
            let c = if d == 1 { n.to_string() } else { format!("{n}/{d}") };
            json!([e, c])
        })
        .collect();
    json!({ "m": z.order(), "terms": terms })
}

type Elems = Vec<FieldElement>;

/// A starred function evaluated pointwise, or tabulated when a character
/// tuple will be checked at most argument pairs.
enum StarEval {
    Kernel(StarKernel<CycloNumber>),
    Grid(KernelGrid<CycloNumber>),
}

impl StarEval {
    fn new(s: &ExactSums, kernel: StarKernel<CycloNumber>, dense: bool) -> Self {
        if dense {
            StarEval::Grid(kernel.grid(s))
        } else {
            StarEval::Kernel(kernel)
        }
    }

    fn eval(&self, s: &ExactSums, x: FieldElement, y: FieldElement) -> CycloNumber {
        match self {
            StarEval::Kernel(k) => k.eval(s, x, y),
            StarEval::Grid(g) => g.eval(s, x, y),
        }
    }
}
type Checker<'a> = Box<dyn Fn(&[FieldElement]) -> (CycloNumber, CycloNumber) + Send + Sync + 'a>;

/// Shared state for running suites over one field.
pub struct Verifier {
    sums: ExactSums,
    f21_one: OnceLock<Vec<CycloNumber>>,
}

impl Verifier {
    pub fn new(ctx: Arc<FieldContext>) -> Self {
        Verifier {
            sums: ExactSums::new(ctx),
            f21_one: OnceLock::new(),
        }
    }

    pub fn from_sums(sums: ExactSums) -> Self {
        Verifier {
            sums,
            f21_one: OnceLock::new(),
        }
    }

    pub fn sums(&self) -> &ExactSums {
        &self.sums
    }

    pub fn field(&self) -> &FieldContext {
        self.sums.field()
    }

    /// `2F1*(A, B; C | 1)` for all triples.
    fn f21_one(&self, a: u32, b: u32, c: u32) -> &CycloNumber {
        let n = self.sums.n();
        let table = self.f21_one.get_or_init(|| {
            (0..n * n * n)
                .into_par_iter()
                .map(|i| f21_star_at_one(&self.sums, i / (n * n), (i / n) % n, i % n))
                .collect()
        });
        &table[((a * n + b) * n + c) as usize]
    }

    fn chars_ok(&self, suite: SuiteId, c: &[u32]) -> bool {
        match suite {
            SuiteId::Prop25 => c[0] != 0 && c[1] != c[2],
            SuiteId::Rel1 => c[0] != c[1],
            SuiteId::Rel2 => c[0] != 0 && c[1] != 0,
            SuiteId::Rel3 => c[0] != 0 && c[1] != 0 && c[1] != c[2],
            SuiteId::Rel4 => c[0] != 0 && c[1] != 0 && c[1] != c[2] && c[0] != c[2],
            SuiteId::Rel5 => c[0] != 0 && c[0] != c[1],
            SuiteId::Thm2a => c.iter().all(|&k| k != 0) && c[1] != c[2],
            SuiteId::Thm2b => c.iter().all(|&k| k != 0) && c[1] != c[2] && c[0] != c[2],
            SuiteId::Thm3 | SuiteId::Thm3Variant => c[1] != 0 && c[0] != c[1] && c[1] != c[2] && c[2] != c[0],
            _ => true,
        }
    }

    fn elems_ok(&self, suite: SuiteId, e: &[FieldElement]) -> bool {
        let f = self.field();
        let one = f.one();
        match suite {
            SuiteId::LemmaG7 => !e[0].is_zero() && e[0] != one,
            SuiteId::Rel1 | SuiteId::Rel2 => !e[0].is_zero(),
            SuiteId::Rel3 | SuiteId::Rel4 | SuiteId::Rel5 => e[0] != one,
            SuiteId::Thm1 | SuiteId::Thm2a => e[0] != one && e[1] != one,
            SuiteId::Thm2b => e[0] != one && e[1] != one && f.mul(e[0], e[1]) != one,
            SuiteId::Thm3 | SuiteId::Thm3Variant => e.iter().all(|&v| !v.is_zero() && v != one),
            _ => true,
        }
    }

    /// Whether `(chars, elems)` satisfies the suite's hypotheses.
    pub fn admissible(&self, suite: SuiteId, chars: &[u32], elems: &[FieldElement]) -> bool {
        self.chars_ok(suite, chars) && self.elems_ok(suite, elems)
    }

    fn mccarthy2(&self, a: u32, b: u32, c: u32) -> Vec<CycloNumber> {
        mccarthy_kernel(&self.sums, &[a, b], &[c])
    }

    fn checker(&self, suite: SuiteId, c: &[u32], dense: bool) -> Checker<'_> {
        let s = &self.sums;
        let f = s.field();
        let q = s.q();
        let n = s.n() as i64;
        let m = s.m();
        let i = move |k: i64| s.idx(k);
        let c: Vec<i64> = c.iter().map(|&k| k as i64).collect();
        let int = move |v: i64| CycloNumber::from_int(m, v);
        match suite {
            SuiteId::Orthogonality => Box::new(move |e| {
                let mut lhs = CycloNumber::zero(m);
                for k in 0..s.n() {
                    lhs = lhs.add(&s.chi(k, e[0]));
                }
                (lhs, int(if e[0] == f.one() { n } else { 0 }))
            }),
            SuiteId::LemmaG1 => Box::new(move |_| {
                let k = c[0];
                let lhs = s.g(i(k)).mul(s.g(i(-k)));
                let rhs = int(q * s.sign(i(k)) - if k == 0 { q - 1 } else { 0 });
                (lhs, rhs)
            }),
            SuiteId::LemmaGj1 => Box::new(move |_| {
                let (a, b) = (c[0], c[1]);
                let lhs = jacobi(f, f.character(a), f.character(b));
                let mut rhs = s.g(i(a)).mul(s.g(i(b))).mul(s.g_inv(i(a + b)));
                if i(a + b) == 0 {
                    rhs = rhs.add(&int((q - 1) * s.sign(i(b))));
                }
                (lhs, rhs)
            }),
            SuiteId::LemmaG2 => Box::new(move |_| {
                let (a, b, cc, d) = (c[0], c[1], c[2], c[3]);
                let mut lhs = CycloNumber::zero(m);
                for k in 0..n {
                    let t = s.gauss_pair(i(a + k), i(b + k)).mul(&s.gauss_pair(i(cc - k), i(d - k)));
                    lhs = lhs.add(&t);
                }
                let lhs = lhs.scale(1, n).unwrap();
                let mut rhs = s
                    .gauss_pair(i(a + cc), i(a + d))
                    .mul(&s.gauss_pair(i(b + cc), i(b + d)))
                    .mul(s.g_inv(i(a + b + cc + d)));
                if i(a + b + cc + d) == 0 {
                    rhs = rhs.add(&int(q * (q - 1) * s.sign(i(a + b))));
                }
                (lhs, rhs)
            }),
            SuiteId::LemmaG3 => Box::new(move |_| {
                let k = self.mccarthy2(i(c[0]), i(c[1]), i(c[2]));
                let lhs = eval_kernel(s, &k, f.one());
                (lhs, self.f21_one(i(c[0]), i(c[1]), i(c[2])).clone())
            }),
            SuiteId::LemmaG7 => {
                let a = c[0];
                // g(A chi) g(chi-bar) / ((q-1) g(A))
                let norm = s.g_inv(i(a)).scale(1, n).unwrap();
                let kernel: Vec<CycloNumber> = (0..n).map(|k| s.gauss_pair(i(a + k), i(-k)).mul(&norm)).collect();
                Box::new(move |e| {
                    let x = e[0];
                    (s.chi(i(-a), f.one_minus(x)), eval_kernel(s, &kernel, f.neg(x)))
                })
            }
            SuiteId::BinomB3 => Box::new(move |_| {
                let (a, b) = (i(c[0]), i(c[1]));
                let rhs = s.binom(i(c[1] - c[0]), b).scale(s.sign(b), 1).unwrap();
                (s.binom(a, b).clone(), rhs)
            }),
            SuiteId::BinomThm1 => Box::new(move |e| {
                let (a, x) = (c[0], e[0]);
                let lhs = s.chi(i(-a), f.one_minus(x));
                let mut sum = CycloNumber::zero(m);
                for k in 0..n {
                    sum = sum.add(&s.binom(i(a + k), i(k)).mul(&s.chi(i(k), x)));
                }
                let mut rhs = sum.scale(q, n).unwrap();
                if x.is_zero() {
                    rhs = rhs.add(&int(1));
                }
                (lhs, rhs)
            }),
            SuiteId::BinomThm2 => Box::new(move |e| {
                let (a, b, x) = (c[0], c[1], e[0]);
                let lhs = s.chi(i(-b), x).mul(&s.chi(i(b - a), f.one_minus(x)));
                let mut sum = CycloNumber::zero(m);
                for k in 0..n {
                    sum = sum.add(&s.binom(i(a + k), i(b + k)).mul(&s.chi(i(k), x)));
                }
                (lhs, sum.scale(q, n).unwrap())
            }),
            SuiteId::Prop25 => {
                let (a0, a1, b1) = (i(c[0]), i(c[1]), i(c[2]));
                let kernel = self.mccarthy2(a0, a1, b1);
                let factor = s.binom_inv(a1, b1).clone();
                Box::new(move |e| {
                    let lhs = eval_kernel(s, &kernel, e[0]);
                    let rhs = factor.mul(&greene_nfn_binomsum_idx(s, &[a0, a1], &[b1], e[0]));
                    (lhs, rhs)
                })
            }
            SuiteId::Rel1 | SuiteId::Rel2 | SuiteId::Rel5 => {
                let (kernel, case, args) = match suite {
                    SuiteId::Rel1 => {
                        let (a1, b1) = (i(c[0]), i(c[1]));
                        (self.mccarthy2(0, a1, b1), SpecialCase::Rel1, vec![0, a1, b1])
                    }
                    SuiteId::Rel2 => {
                        let (a0, a1) = (i(c[0]), i(c[1]));
                        (self.mccarthy2(a0, a1, a1), SpecialCase::Rel2, vec![a0, a1, a1])
                    }
                    _ => {
                        let (a, b) = (i(c[0]), i(c[1]));
                        (self.mccarthy2(a, b, a), SpecialCase::Rel5, vec![a, b])
                    }
                };
                Box::new(move |e| {
                    let lhs = eval_kernel(s, &kernel, e[0]);
                    let rhs = f21_star_special(s, case, &args, e[0]).expect("admissible tuple");
                    (lhs, rhs)
                })
            }
            SuiteId::Rel3 => {
                let (a, b, cc) = (c[0], c[1], c[2]);
                let k1 = self.mccarthy2(i(a), i(b), i(cc));
                let k2 = self.mccarthy2(i(a), i(cc - b), i(cc));
                Box::new(move |e| {
                    let x = e[0];
                    let one_x = f.one_minus(x);
                    let arg = f.div(f.neg(x), one_x).unwrap();
                    let rhs = s.chi(i(-a), one_x).mul(&eval_kernel(s, &k2, arg));
                    (eval_kernel(s, &k1, x), rhs)
                })
            }
            SuiteId::Rel4 => {
                let (a, b, cc) = (c[0], c[1], c[2]);
                let k1 = self.mccarthy2(i(a), i(b), i(cc));
                let k2 = self.mccarthy2(i(cc - a), i(cc - b), i(cc));
                Box::new(move |e| {
                    let x = e[0];
                    let rhs = s.chi(i(cc - a - b), f.one_minus(x)).mul(&eval_kernel(s, &k2, x));
                    (eval_kernel(s, &k1, x), rhs)
                })
            }
            SuiteId::GreeneRouteEq => Box::new(move |e| {
                let (a, b, cc) = (i(c[0]), i(c[1]), i(c[2]));
                (
                    greene_2f1_fieldsum(s, a, b, cc, e[0]),
                    greene_nfn_binomsum_idx(s, &[a, b], &[cc], e[0]),
                )
            }),
            SuiteId::Thm1 => self.thm1_checker(&c, dense),
            SuiteId::Thm2a | SuiteId::Thm2b => self.thm2_checker(&c, suite == SuiteId::Thm2a, dense),
            SuiteId::Thm3 | SuiteId::Thm3Variant => self.thm3_checker(&c, suite == SuiteId::Thm3, dense),
        }
    }

    /// `(-x/((1-x)(1-y)), -y/((1-x)(1-y)))` for `x, y != 1`.
    fn f4_arguments(&self, x: FieldElement, y: FieldElement) -> (FieldElement, FieldElement) {
        let f = self.field();
        let d = f.mul(f.one_minus(x), f.one_minus(y));
        (f.div(f.neg(x), d).unwrap(), f.div(f.neg(y), d).unwrap())
    }

    fn thm1_checker(&self, c: &[i64], dense: bool) -> Checker<'_> {
        let s = &self.sums;
        let f = s.field();
        let n = s.n();
        let i = |k: i64| s.idx(k);
        let (a, b, cc, cc2) = (c[0], c[1], c[2], c[3]);
        let f4 = StarKernel::new(s, AppellKind::F4Star, &[i(a), i(b), i(cc), i(cc2)]).unwrap();
        let f4 = StarEval::new(s, f4, dense);
        // 2F1*(chi-bar, A psi; C' | 1) 2F1*(psi-bar, B chi; C | 1)
        //   g(A psi) g(psi-bar) g(B chi) g(chi-bar) / (g(A) g(B) (q-1)^2)
        let norm = s.g_inv(i(a)).mul(s.g_inv(i(b))).scale(1, n as i64 * n as i64).unwrap();
        let row: Vec<CycloNumber> = (0..n as i64)
            .map(|k| s.gauss_pair(i(a + k), i(-k)).mul(&norm))
            .collect();
        let col: Vec<CycloNumber> = (0..n as i64)
            .map(|k| s.gauss_pair(i(b + k), i(-k)).into_owned())
            .collect();
        let mut coeffs = Vec::with_capacity((n * n) as usize);
        for psi in 0..n as i64 {
            for chi in 0..n as i64 {
                let v = self
                    .f21_one(i(-chi), i(a + psi), i(cc2))
                    .mul(self.f21_one(i(-psi), i(b + chi), i(cc)))
                    .mul(&row[psi as usize])
                    .mul(&col[chi as usize]);
                coeffs.push(v.canonical());
            }
        }
        let rhs_kernel = StarEval::new(s, StarKernel::from_coeffs(n, coeffs), dense);
        Box::new(move |e| {
            let (x, y) = (e[0], e[1]);
            let (big_x, big_y) = self.f4_arguments(x, y);
            let lhs = s
                .chi(i(-a), f.one_minus(x))
                .mul(&s.chi(i(-b), f.one_minus(y)))
                .mul(&f4.eval(s, big_x, big_y));
            (lhs, rhs_kernel.eval(s, f.neg(x), f.neg(y)))
        })
    }

    fn thm2_checker(&self, c: &[i64], corrections: bool, dense: bool) -> Checker<'_> {
        self.thm2_checker_with(c, corrections, false, dense)
    }

    /// `gate_on_ac`: multiply the `(q-1)/q` term by `delta(A C-bar)`.
    fn thm2_checker_with(&self, c: &[i64], corrections: bool, gate_on_ac: bool, dense: bool) -> Checker<'_> {
        let s = &self.sums;
        let f = s.field();
        let q = s.q();
        let i = |k: i64| s.idx(k);
        let (a, b, cc) = (c[0], c[1], c[2]);
        let cc2 = a + b - cc;
        let f4 = StarKernel::new(s, AppellKind::F4Star, &[i(a), i(b), i(cc), i(cc2)]).unwrap();
        let f4 = StarEval::new(s, f4, dense);
        let k1 = self.mccarthy2(i(a), i(b), i(cc));
        let k2 = self.mccarthy2(i(a), i(b), i(cc2));
        // q^2 AC(-1) / (g(A) g(B) g(C-bar) g((AB)-bar C))
        let delta_coeff = s
            .g_inv(i(a))
            .mul(s.g_inv(i(b)))
            .mul(s.g_inv(i(-cc)))
            .mul(s.g_inv(i(-cc2)))
            .scale(q * q * s.sign(i(a + cc)), 1)
            .unwrap();
        Box::new(move |e| {
            let (x, y) = (e[0], e[1]);
            let (big_x, big_y) = self.f4_arguments(x, y);
            let lhs = f4.eval(s, big_x, big_y);
            let (one_x, one_y) = (f.one_minus(x), f.one_minus(y));
            let u = f.div(f.neg(x), one_x).unwrap();
            let v = f.div(f.neg(y), one_y).unwrap();
            let mut rhs = eval_kernel(s, &k1, u).mul(&eval_kernel(s, &k2, v));
            if corrections {
                if !gate_on_ac || i(a) == i(cc) {
                    // x/(x-1) = -x/(1-x)
                    let t = s.chi(i(-a), u).mul(&s.chi(i(-b), v)).scale(q - 1, q).unwrap();
                    rhs = rhs.add(&t);
                }
                if f.mul(x, y) == f.one() {
                    let d = delta_coeff
                        .mul(&s.chi(i(cc - b), y))
                        .mul(&s.chi(i(a), one_x))
                        .mul(&s.chi(i(b), one_y));
                    rhs = rhs.sub(&d);
                }
            }
            (lhs, rhs)
        })
    }

    fn thm3_checker(&self, c: &[i64], conjugate_lower: bool, dense: bool) -> Checker<'_> {
        let s = &self.sums;
        let f = s.field();
        let q = s.q();
        let i = |k: i64| s.idx(k);
        let (a, b, cc) = (c[0], c[1], c[2]);
        let f4 = StarEval::new(
            s,
            StarKernel::new(s, AppellKind::F4Star, &[i(a), i(b), i(cc), i(b)]).unwrap(),
            dense,
        );
        let lower = if conjugate_lower { i(-cc) } else { i(cc) };
        let f1 = StarKernel::new(s, AppellKind::F1Star, &[i(a), i(cc - b), i(a - cc), lower]).unwrap();
        let f1 = StarEval::new(s, f1, dense);
        // g(B) g(A B-bar) / (q g(A))
        let coeff = s.gauss_pair(i(b), i(a - b)).mul(s.g_inv(i(a))).scale(1, q).unwrap();
        Box::new(move |e| {
            let (x, y) = (e[0], e[1]);
            let (big_x, big_y) = self.f4_arguments(x, y);
            let lhs = f4.eval(s, big_x, big_y);
            let d = f.mul(f.one_minus(x), f.one_minus(y));
            let first = s.chi(i(a), d).mul(&f1.eval(s, x, f.mul(x, y)));
            let second = coeff.mul(&s.chi(i(-b), y)).mul(&s.chi(i(b), d));
            (lhs, first.sub(&second))
        })
    }

    fn dims(&self, suite: SuiteId) -> (usize, usize) {
        let (c, e) = suite.roles();
        (c.len(), e.len())
    }

    fn char_tuple(&self, mut index: u64, len: usize) -> Vec<u32> {
        let n = self.sums.n() as u64;
        let mut out = vec![0u32; len];
        for slot in out.iter_mut().rev() {
            *slot = (index % n) as u32;
            index /= n;
        }
        out
    }

    fn elem_tuples(&self, len: usize) -> Vec<Elems> {
        let elems: Vec<FieldElement> = self.field().elements().collect();
        let mut out: Vec<Elems> = vec![vec![]];
        for _ in 0..len {
            out = out
                .into_iter()
                .flat_map(|t| {
                    elems.iter().map(move |&x| {
                        let mut t = t.clone();
                        t.push(x);
                        t
                    })
                })
                .collect();
        }
        out
    }

    /// Size of the full product space `(q-1)^chars * q^elems`.
    pub fn product_space(&self, suite: SuiteId) -> u64 {
        let (dc, de) = self.dims(suite);
        (self.sums.n() as u64)
            .saturating_pow(dc as u32)
            .saturating_mul((self.field().order() as u64).saturating_pow(de as u32))
    }

    /// Number of admissible tuples.
    pub fn admissible_count(&self, suite: SuiteId) -> u64 {
        let (dc, de) = self.dims(suite);
        let n_chars = (self.sums.n() as u64).pow(dc as u32);
        let elems = self.elem_tuples(de);
        (0..n_chars)
            .into_par_iter()
            .map(|ci| {
                let c = self.char_tuple(ci, dc);
                if !self.chars_ok(suite, &c) {
                    return 0;
                }
                elems.iter().filter(|e| self.elems_ok(suite, e)).count() as u64
            })
            .sum()
    }

    fn params(&self, suite: SuiteId, c: &[u32], e: &[FieldElement]) -> Vec<(String, String)> {
        let (cr, er) = suite.roles();
        let f = self.field();
        cr.iter()
            .zip(c)
            .map(|(r, &k)| (r.to_string(), f.character(k as i64).label()))
            .chain(er.iter().zip(e).map(|(r, &x)| (r.to_string(), f.label(x))))
            .collect()
    }

    /// Checks one character tuple against its element tuples, in order.
    fn check_group<'a>(
        &'a self,
        suite: SuiteId,
        make: &(dyn Fn(&[u32], bool) -> Checker<'a> + Sync),
        c: &[u32],
        elems: &[Elems],
    ) -> (u64, u64, Vec<Violation>) {
        if elems.is_empty() {
            return (0, 0, vec![]);
        }
        let check = make(c, elems.len() >= self.sums.n() as usize);
        let mut found = Vec::new();
        let mut count = 0;
        for e in elems {
            let (lhs, rhs) = check(e);
            if !lhs.sub(&rhs).is_zero() {
                count += 1;
                if found.len() < MAX_RECORDED_VIOLATIONS {
                    found.push(Violation {
                        params: self.params(suite, c, e),
                        lhs: lhs.canonical(),
                        rhs: rhs.canonical(),
                    });
                }
            }
        }
        (elems.len() as u64, count, found)
    }

    fn merge(&self, results: Vec<(u64, u64, Vec<Violation>)>) -> (u64, u64, Vec<Violation>) {
        let mut tested = 0;
        let mut count = 0;
        let mut violations = Vec::new();
        for (t, c, v) in results {
            tested += t;
            count += c;
            violations.extend(v);
        }
        violations.truncate(MAX_RECORDED_VIOLATIONS);
        (tested, count, violations)
    }

    fn run_exhaustive(&self, suite: SuiteId) -> (u64, u64, Vec<Violation>) {
        self.run_exhaustive_with(suite, &|c, dense| self.checker(suite, c, dense))
    }

    fn run_exhaustive_with<'a>(
        &'a self,
        suite: SuiteId,
        make: &(dyn Fn(&[u32], bool) -> Checker<'a> + Sync),
    ) -> (u64, u64, Vec<Violation>) {
        let (dc, de) = self.dims(suite);
        let n_chars = (self.sums.n() as u64).pow(dc as u32);
        let elems = self.elem_tuples(de);
        let results = (0..n_chars)
            .into_par_iter()
            .map(|ci| {
                let c = self.char_tuple(ci, dc);
                if !self.chars_ok(suite, &c) {
                    return (0, 0, vec![]);
                }
                let admissible: Vec<Elems> = elems.iter().filter(|e| self.elems_ok(suite, e)).cloned().collect();
                self.check_group(suite, make, &c, &admissible)
            })
            .collect();
        self.merge(results)
    }

    /// Draws `samples` admissible tuples uniformly by rejection from the
    /// product space. Gives up (possibly with fewer tuples) after
    /// `1000 * samples` draws, which only happens for empty or tiny spaces.
    pub fn sample_tuples(&self, suite: SuiteId, samples: usize, seed: u64) -> Vec<(Vec<u32>, Elems)> {
        let (dc, de) = self.dims(suite);
        let f = self.field();
        let (n, q) = (self.sums.n(), f.order());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(samples);
        let max_draws = samples.saturating_mul(1000).max(1000);
        for _ in 0..max_draws {
            if out.len() == samples {
                break;
            }
            let c: Vec<u32> = (0..dc).map(|_| rng.gen_range(0..n)).collect();
            let e: Elems = (0..de).map(|_| f.element_at(rng.gen_range(0..q))).collect();
            if self.admissible(suite, &c, &e) {
                out.push((c, e));
            }
        }
        out
    }

    fn run_sampled(&self, suite: SuiteId, samples: usize, seed: u64) -> (u64, u64, Vec<Violation>) {
        let f = self.field();
        let mut draws = self.sample_tuples(suite, samples, seed);
        draws.sort_by(|(c1, e1), (c2, e2)| {
            c1.cmp(c2).then_with(|| {
                let l1: Vec<u32> = e1.iter().map(|&x| f.label_index(x)).collect();
                let l2: Vec<u32> = e2.iter().map(|&x| f.label_index(x)).collect();
                l1.cmp(&l2)
            })
        });
        let mut groups: Vec<(Vec<u32>, Vec<Elems>)> = Vec::new();
        for (c, e) in draws {
            match groups.last_mut() {
                Some((last, es)) if *last == c => es.push(e),
                _ => groups.push((c, vec![e])),
            }
        }
        let make = |c: &[u32], dense: bool| self.checker(suite, c, dense);
        let results = groups
            .par_iter()
            .map(|(c, es)| self.check_group(suite, &make, c, es))
            .collect();
        self.merge(results)
    }

    pub fn run_suite(
        &self,
        suite: SuiteId,
        mode: Mode,
        samples: Option<usize>,
        seed: Option<u64>,
    ) -> Result<VerificationReport> {
        let start = Instant::now();
        let (tested, count, violations) = match mode {
            Mode::Exhaustive => self.run_exhaustive(suite),
            Mode::Sample => {
                let samples = samples.ok_or(Error::SamplingConfig("a sample count"))?;
                let seed = seed.ok_or(Error::SamplingConfig("a seed"))?;
                self.run_sampled(suite, samples, seed)
            }
        };
        let f = self.field();
        Ok(VerificationReport {
            suite,
            p: f.characteristic(),
            r: f.degree(),
            q: f.order(),
            mode,
            seed: seed.unwrap_or(0),
            tuples_tested: tested,
            violation_count: count,
            violations,
            elapsed_s: start.elapsed().as_secs_f64(),
        })
    }

    /// Exhaustive run of the thm2a tuple space with its `(q-1)/q` term
    /// multiplied by `delta(A C-bar)`, which is where that term comes from
    /// (`g(A C-bar) g(A-bar C) = q AC(-1) - (q-1) delta(A C-bar)`). Not part
    /// of [`SuiteId::ALL`]; explains the violations of thm2a as written.
    pub fn thm2a_gated_report(&self) -> VerificationReport {
        let start = Instant::now();
        let suite = SuiteId::Thm2a;
        let make = |c: &[u32], dense: bool| {
            let c: Vec<i64> = c.iter().map(|&k| k as i64).collect();
            self.thm2_checker_with(&c, true, true, dense)
        };
        let (tested, count, violations) = self.run_exhaustive_with(suite, &make);
        let f = self.field();
        VerificationReport {
            suite,
            p: f.characteristic(),
            r: f.degree(),
            q: f.order(),
            mode: Mode::Exhaustive,
            seed: 0,
            tuples_tested: tested,
            violation_count: count,
            violations,
            elapsed_s: start.elapsed().as_secs_f64(),
        }
    }

    /// The mode [`run_all`] picks for `suite` under `budget`.
    pub fn schedule(&self, suite: SuiteId, budget: u64) -> Mode {
        let size = self.product_space(suite);
        if size <= budget {
            return Mode::Exhaustive;
        }
        if size <= budget.saturating_mul(8) && self.admissible_count(suite) <= budget {
            return Mode::Exhaustive;
        }
        Mode::Sample
    }

    /// Runs every suite in [`SuiteId::ALL`] order.
    pub fn run_all(&self, budget: u64, samples: usize, seed: u64) -> Vec<VerificationReport> {
        SuiteId::ALL
            .iter()
            .map(|&suite| {
                let mode = self.schedule(suite, budget);
                self.run_suite(suite, mode, Some(samples), Some(seed))
                    .expect("sampling configured")
            })
            .collect()
    }
}

/// Runs one suite on `ctx`.
pub fn run_suite(
    suite: SuiteId,
    ctx: Arc<FieldContext>,
    mode: Mode,
    samples: Option<usize>,
    seed: Option<u64>,
) -> Result<VerificationReport> {
    Verifier::new(ctx).run_suite(suite, mode, samples, seed)
}

/// Runs every suite on `ctx`, exhaustively where the admissible space fits
/// in `budget` tuples and on [`DEFAULT_SAMPLES`] seeded samples otherwise.
pub fn run_all(ctx: Arc<FieldContext>, budget: u64, seed: u64) -> Vec<VerificationReport> {
    Verifier::new(ctx).run_all(budget, DEFAULT_SAMPLES, seed)
}

/// Budget from `FFAPPELL_BUDGET`, else [`DEFAULT_BUDGET`].
pub fn budget_from_env() -> u64 {
    std::env::var("FFAPPELL_BUDGET")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_BUDGET)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn verifier(p: u32, r: u32) -> Verifier {
        Verifier::new(Arc::new(FieldContext::new(p, r).unwrap()))
    }

    #[test]
    fn suite_names_round_trip() {
        for id in SuiteId::ALL {
            assert_eq!(id.name().parse::<SuiteId>().unwrap(), id);
        }
        assert_eq!(
            "nope".parse::<SuiteId>().unwrap_err(),
            Error::UnknownSuite("nope".into())
        );
    }

    #[test]
    fn tuple_counts() {
        let v3 = verifier(3, 1);
        assert_eq!(v3.admissible_count(SuiteId::Thm1), 64);
        assert_eq!(v3.admissible_count(SuiteId::Thm2a), 0);
        let v5 = verifier(5, 1);
        assert_eq!(v5.admissible_count(SuiteId::Thm2a), 288);
        assert_eq!(v5.admissible_count(SuiteId::Thm1), 4096);
        assert_eq!(verifier(7, 1).admissible_count(SuiteId::Orthogonality), 7);
    }

    #[test]
    fn small_runs() {
        let v = verifier(3, 1);
        let r = v.run_suite(SuiteId::Thm1, Mode::Exhaustive, None, None).unwrap();
        assert_eq!((r.tuples_tested, r.status()), (64, Status::Verified));
        let r = v.run_suite(SuiteId::Thm2a, Mode::Exhaustive, None, None).unwrap();
        assert_eq!(r.status(), Status::Vacuous);
        let r = verifier(7, 1)
            .run_suite(SuiteId::Orthogonality, Mode::Exhaustive, None, None)
            .unwrap();
        assert_eq!((r.tuples_tested, r.status()), (7, Status::Verified));
    }

    #[test]
    fn sampling_is_admissible_and_seeded() {
        let v = verifier(7, 1);
        let a = v.sample_tuples(SuiteId::Thm3, 200, 11);
        assert_eq!(a.len(), 200);
        assert!(a.iter().all(|(c, e)| v.admissible(SuiteId::Thm3, c, e)));
        assert_eq!(a, v.sample_tuples(SuiteId::Thm3, 200, 11));
        assert_ne!(a, v.sample_tuples(SuiteId::Thm3, 200, 12));
        assert!(v.run_suite(SuiteId::Thm3, Mode::Sample, None, Some(1)).is_err());
    }

    #[test]
    fn schedule_follows_budget() {
        let v = verifier(5, 1);
        assert_eq!(v.schedule(SuiteId::Thm1, DEFAULT_BUDGET), Mode::Exhaustive);
        assert_eq!(v.schedule(SuiteId::Thm1, 100), Mode::Sample);
    }

    #[test]
    fn report_json_is_deterministic() {
        let v = verifier(5, 1);
        let a = v.run_suite(SuiteId::LemmaG1, Mode::Exhaustive, None, Some(3)).unwrap();
        let b = v.run_suite(SuiteId::LemmaG1, Mode::Exhaustive, None, Some(3)).unwrap();
        assert_eq!(a.to_json(false).to_string(), b.to_json(false).to_string());
        assert_eq!(a.to_json(false)["elapsed_s"], Value::Null);
        assert_eq!(a.to_json(false)["status"], "verified");
    }
}
