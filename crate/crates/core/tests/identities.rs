use leibniz_rota::algebra::{combined_bracket, default_data_dir, leibniz_residual, DataSet};
use leibniz_rota::arith::{Bindings, RatExpr, Scalar};
use leibniz_rota::cli::verified_families;
use leibniz_rota::compat::{is_compatible, mixed_residual, SECOND_SUFFIX};
use leibniz_rota::operators::{identity_chart, operator_residual, zero_chart, OperatorFamily, OperatorKind};
use leibniz_rota::oracle::{DirectEvaluator, FpChart, MEMBERSHIP_BUDGET};
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn data() -> DataSet {
    DataSet::load(default_data_dir()).unwrap()
}

#[test]
fn combined_bracket_expands_into_residuals() {
    let d = data();
    let (l1, l2) = (RatExpr::named("l1"), RatExpr::named("l2"));
    let tables = d.resolved.tables();
    for (i, a) in tables.iter().enumerate() {
        for b in &tables[i + 1..] {
            let b = b.rename_params(SECOND_SUFFIX);
            let lhs = leibniz_residual(&combined_bracket(a, &b, &l1, &l2).unwrap());
            let rhs = leibniz_residual(a)
                .scaled(&(&l1 * &l1))
                .add(&leibniz_residual(&b).scaled(&(&l2 * &l2)))
                .add(&mixed_residual(a, &b).unwrap().scaled(&(&l1 * &l2)));
            assert_eq!(lhs, rhs, "({}, {})", a.name(), b.name());
        }
    }
}

#[test]
fn compatibility_is_symmetric() {
    let d = data();
    let tables = d.resolved.tables();
    for a in tables {
        for b in tables {
            let b2 = b.rename_params(SECOND_SUFFIX);
            let a2 = a.rename_params(SECOND_SUFFIX);
            assert_eq!(is_compatible(a, &b2).unwrap(), is_compatible(b, &a2).unwrap());
        }
    }
}

#[test]
fn trivial_operators() {
    let d = data();
    let minus_one = RatExpr::from_int(-1);
    for a in d.resolved.tables() {
        let n = a.dim();
        for kind in [
            OperatorKind::RotaBaxter(RatExpr::named("lam")),
            OperatorKind::Nijenhuis,
            OperatorKind::Reynolds,
            OperatorKind::Averaging,
        ] {
            assert!(operator_residual(a, &kind, &zero_chart(n)).unwrap().is_zero(), "{} {kind}", a.name());
        }
        for kind in [OperatorKind::RotaBaxter(minus_one.clone()), OperatorKind::Nijenhuis, OperatorKind::Reynolds] {
            assert!(operator_residual(a, &kind, &identity_chart(n)).unwrap().is_zero(), "{} {kind}", a.name());
        }
    }
}

fn scaled(chart: &[Vec<RatExpr>], c: &RatExpr) -> Vec<Vec<RatExpr>> {
    chart.iter().map(|row| row.iter().map(|e| c * e).collect()).collect()
}

fn random_point(fam: &OperatorFamily, rng: &mut ChaCha8Rng) -> Option<Vec<Vec<RatExpr>>> {
    let point: Bindings = fam
        .free
        .iter()
        .map(|p| (p.clone(), RatExpr::scalar(Scalar::ratio(rng.gen_range(-7..=7), rng.gen_range(1..=4)))))
        .collect();
    let mut out = Vec::new();
    for row in &fam.chart {
        let mut r = Vec::new();
        for e in row {
            r.push(e.substitute(&point).ok()?);
        }
        out.push(r);
    }
    for c in &fam.constraints {
        if c.substitute(&point).ok()?.is_zero() {
            return None;
        }
    }
    Some(out)
}

#[test]
fn rota_baxter_weight_scales_with_the_operator() {
    let d = data();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for a in d.resolved.tables() {
        for c in [2, -3, 5] {
            let c = RatExpr::from_int(c);
            let kind = OperatorKind::RotaBaxter(-&c);
            assert!(operator_residual(a, &kind, &scaled(&identity_chart(a.dim()), &c)).unwrap().is_zero());
        }
    }
    let fams = verified_families(&d).unwrap();
    for fam in fams.iter().filter(|f| matches!(f.kind, OperatorKind::RotaBaxter(_))) {
        let a = d.resolved.get(&fam.algebra).unwrap();
        let binding = a.sample_bindings().remove(0);
        let (a, fam) = (a.bind(&binding).unwrap(), fam.bind(&binding).unwrap());
        let OperatorKind::RotaBaxter(w) = &fam.kind else { unreachable!() };
        let Some(chart) = (0..20).find_map(|_| random_point(&fam, &mut rng)) else { continue };
        for c in [RatExpr::from_int(3), RatExpr::scalar(Scalar::ratio(-1, 2))] {
            let kind = OperatorKind::RotaBaxter(&c * w);
            assert!(operator_residual(&a, &kind, &scaled(&chart, &c)).unwrap().is_zero(), "{}", fam.id());
        }
    }
}

/// Chart points reduced mod p must solve the identity evaluated directly from
/// the bracket, independently of the symbolic equation system.
#[test]
fn sampled_chart_points_are_solutions() {
    let d = data();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let fams = verified_families(&d).unwrap();
    let mut checked = 0;
    for fam in &fams {
        let a = d.resolved.get(&fam.algebra).unwrap();
        if !a.is_real() {
            continue;
        }
        for binding in a.sample_bindings() {
            let (Ok(bound), Ok(f)) = (a.bind(&binding), fam.bind(&binding)) else { continue };
            for p in [5u32, 7] {
                let (Ok(chart), Ok(eval)) = (FpChart::new(&f, p), DirectEvaluator::new(&bound, &f.kind, p)) else { continue };
                for _ in 0..100 {
                    let Some((_, m)) = chart.sample(&mut rng, 200) else { break };
                    assert!(eval.is_solution(m.entries()), "{} mod {p}: {m}", f.id());
                    assert!(chart.contains(&m, MEMBERSHIP_BUDGET).unwrap(), "{} mod {p}: {m}", f.id());
                    checked += 1;
                }
            }
        }
    }
    assert!(checked > 10_000, "{checked}");
}
