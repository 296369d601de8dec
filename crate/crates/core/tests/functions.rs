use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ffappell::appell::{appell, AppellKind, AppellSpec, StarKernel};
use ffappell::field::FieldContext;
use ffappell::hyperff::{greene_nfn_binomsum_idx, mccarthy_star_idx};
use ffappell::sums::ExactSums;
use ffappell::verify::{Mode, SuiteId, Verifier};

fn sums(p: u32, r: u32) -> ExactSums {
    ExactSums::new(Arc::new(FieldContext::new(p, r).unwrap()))
}

#[test]
fn binomials_never_vanish() {
    for (p, r) in [(3, 1), (5, 1), (7, 1), (3, 2), (11, 1), (13, 1)] {
        let s = sums(p, r);
        for a in 0..s.n() {
            for b in 0..s.n() {
                assert!(!s.binom(a, b).is_zero(), "q={} ({a}|{b})", s.q());
            }
        }
    }
}

#[test]
fn mccarthy_greene_bridge_3f2_sampled() {
    let s = sums(5, 1);
    let f = s.field();
    let n = s.n();
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    let mut tested = 0;
    while tested < 1000 {
        let a: Vec<u32> = (0..3).map(|_| rng.gen_range(0..n)).collect();
        let b: Vec<u32> = (0..2).map(|_| rng.gen_range(0..n)).collect();
        if a[0] == 0 || a[1] == b[0] || a[2] == b[1] {
            continue;
        }
        let x = f.element_at(rng.gen_range(0..s.q() as u32));
        let lhs = mccarthy_star_idx(&s, &a, &b, x);
        let rhs = s
            .binom_inv(a[1], b[0])
            .mul(s.binom_inv(a[2], b[1]))
            .mul(&greene_nfn_binomsum_idx(&s, &a, &b, x));
        assert_eq!(lhs, rhs, "A={a:?} B={b:?} x={}", f.label(x));
        tested += 1;
    }
}

#[test]
fn f4_star_symmetric_in_a_b_q7() {
    let s = sums(7, 1);
    let f = s.field();
    let n = s.n();
    for a in 0..n {
        for b in a + 1..n {
            for c in 0..n {
                for c2 in 0..n {
                    let k1 = StarKernel::new(&s, AppellKind::F4Star, &[a, b, c, c2])
                        .unwrap()
                        .grid(&s);
                    let k2 = StarKernel::new(&s, AppellKind::F4Star, &[b, a, c, c2])
                        .unwrap()
                        .grid(&s);
                    for x in f.units() {
                        for y in f.units() {
                            assert_eq!(k1.eval(&s, x, y), k2.eval(&s, x, y));
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn every_kind_vanishes_at_zero_argument() {
    let s = sums(5, 1);
    let f = s.field();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for kind in AppellKind::ALL {
        for _ in 0..50 {
            let chars: Vec<_> = (0..kind.arity()).map(|_| f.character(rng.gen_range(0..4))).collect();
            let u = f.element_at(rng.gen_range(0..5));
            for (x, y) in [(f.zero(), u), (u, f.zero())] {
                let spec = AppellSpec::new(kind, chars.clone(), x, y).unwrap();
                assert!(appell(&s, &spec).unwrap().is_zero(), "{kind}");
            }
        }
    }
}

#[test]
fn sampled_tuples_are_admissible() {
    let v = Verifier::new(Arc::new(FieldContext::new(7, 1).unwrap()));
    for suite in SuiteId::ALL {
        for (c, e) in v.sample_tuples(suite, 300, 11) {
            assert!(v.admissible(suite, &c, &e), "{suite}");
        }
    }
}

#[test]
fn sampling_is_seeded() {
    let v = Verifier::new(Arc::new(FieldContext::new(5, 1).unwrap()));
    let a = v.run_suite(SuiteId::Thm1, Mode::Sample, Some(200), Some(3)).unwrap();
    let b = v.run_suite(SuiteId::Thm1, Mode::Sample, Some(200), Some(3)).unwrap();
    assert_eq!(a.to_json(false), b.to_json(false));
    assert_eq!(a.tuples_tested, 200);
    assert!(v.run_suite(SuiteId::Thm1, Mode::Sample, None, Some(3)).is_err());
}

// thm2a as written fails whenever A != C;
// gating its (q-1)/q term by delta(A C-bar) repairs it.
#[test]
fn thm2a_gated_form_holds() {
    for p in [5, 7] {
        let v = Verifier::new(Arc::new(FieldContext::new(p, 1).unwrap()));
        let gated = v.thm2a_gated_report();
        assert_eq!(gated.violation_count, 0);
        let printed = v.run_suite(SuiteId::Thm2a, Mode::Exhaustive, None, None).unwrap();
        assert_eq!(printed.tuples_tested, gated.tuples_tested);
        assert!(printed.violation_count > 0);
        for viol in &printed.violations {
            let get = |k: &str| viol.params.iter().find(|(n, _)| n == k).unwrap().1.clone();
            assert_ne!(get("A"), get("C"));
        }
    }
}
