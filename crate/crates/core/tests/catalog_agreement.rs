//! The tail-order catalog and the diagonal regression must agree.

use tailorder::copulas::{CopulaModel, PickandsFn};
use tailorder::tailmetrics::estimate_tail_order_analytic;
use tailorder::{tail_order_catalog, Generator, RadialLaw, Side, UGrid};

fn models() -> Vec<CopulaModel> {
    let mut out = vec![];
    for rho in [0.0, 0.3, 0.5, 0.8] {
        out.push(CopulaModel::gaussian(rho).unwrap());
    }
    for (rho, nu) in [(0.3, 3.0), (0.5, 5.0)] {
        out.push(CopulaModel::student(rho, nu).unwrap());
    }
    for d in [2, 3] {
        for alpha in [1.5, 2.5] {
            out.push(CopulaModel::archimedean(d, Generator::acig(alpha).unwrap()).unwrap());
        }
        out.push(CopulaModel::archimedean(d, Generator::joe2000(0.5).unwrap()).unwrap());
    }
    out.push(CopulaModel::archimedean(2, Generator::williamson(RadialLaw::positive_weibull(1.5).unwrap(), 2).unwrap()).unwrap());
    out.push(CopulaModel::archimedean(2, Generator::williamson(RadialLaw::dagum(0.6, 1.8, 1.0).unwrap(), 2).unwrap()).unwrap());
    out
}

const BOTH: &[Side] = &[Side::Lower, Side::Upper];

// Only the lower diagonal of Gumbel and EV copulas is an exact power of u.
fn exact_models() -> Vec<(CopulaModel, &'static [Side])> {
    let mut out: Vec<(CopulaModel, &'static [Side])> = vec![];
    for (theta, d) in [(2.0, 2), (1.5, 3), (3.0, 4)] {
        out.push((CopulaModel::archimedean(d, Generator::gumbel(theta).unwrap()).unwrap(), &[Side::Lower]));
        out.push((CopulaModel::extreme_value(PickandsFn::logistic(theta, d).unwrap()).unwrap(), &[Side::Lower]));
    }
    for d in [2, 3, 5] {
        out.push((CopulaModel::independence(d).unwrap(), BOTH));
        out.push((CopulaModel::comonotone(d).unwrap(), BOTH));
    }
    out
}

fn check(models: &[(CopulaModel, &[Side])], tol: f64) {
    let grid = UGrid::analytic();
    let mut checked = 0;
    for (model, sides) in models {
        let entry = tail_order_catalog(model);
        for &side in *sides {
            let Some(expected) = entry.kappa(side) else { continue };
            let est = estimate_tail_order_analytic(model, side, &grid).unwrap();
            assert!(
                (est.kappa - expected).abs() <= tol,
                "{model:?} {side:?}: estimated {} catalog {expected}",
                est.kappa
            );
            checked += 1;
        }
    }
    assert!(checked > 0);
}

#[test]
fn slowly_varying_families_within_tenth() {
    check(&models().into_iter().map(|m| (m, BOTH)).collect::<Vec<_>>(), 0.1);
}

#[test]
fn exact_power_families_to_rounding() {
    check(&exact_models(), 1e-8);
}
