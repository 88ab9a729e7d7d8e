use ptmetric_core::eigensystem::{biorthonormality_check, BiorthoSettings, Branch};

const K0: f64 = 1.5;

#[test]
fn free_limit_is_biorthonormal() {
    let s = BiorthoSettings::default();
    for a in Branch::BOTH {
        for b in Branch::BOTH {
            let r = biorthonormality_check(K0, 0.0, a, b, &s).unwrap();
            assert!(r.deviation.norm() < 1e-5, "{a:?}{b:?}: {}", r.deviation);
        }
    }
}

#[test]
fn diagonal_deviation_is_second_order() {
    let s = BiorthoSettings::default();
    let d1 = biorthonormality_check(K0, 0.05, Branch::Plus, Branch::Plus, &s).unwrap();
    let d2 = biorthonormality_check(K0, 0.1, Branch::Plus, Branch::Plus, &s).unwrap();
    assert!(d1.first_order.norm() < 1e-6);
    let slope = (d2.deviation.norm() / d1.deviation.norm()).log2();
    assert!((slope - 2.0).abs() < 0.1, "slope {slope}");
}

#[test]
fn cross_term_has_a_first_order_part() {
    // value from the small-Z asymptotics of the damped overlap integrals
    let s = BiorthoSettings::default();
    let pm = biorthonormality_check(K0, 0.1, Branch::Plus, Branch::Minus, &s).unwrap();
    let mp = biorthonormality_check(K0, 0.1, Branch::Minus, Branch::Plus, &s).unwrap();
    assert!((pm.first_order.re + 0.031360).abs() < 1e-5, "{}", pm.first_order);
    assert!((pm.first_order + mp.first_order).norm() < 1e-10);
    assert!(pm.deviation.norm() > 0.02 * 0.1);
}
