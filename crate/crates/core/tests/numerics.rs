use std::f64::consts::PI;

use casimir_core::numerics::{integrate, integrate_oscillatory, Domain, Tolerance};

struct Case {
    name: &'static str,
    domain: Domain,
    f: fn(f64) -> f64,
    exact: f64,
}

fn battery() -> Vec<Case> {
    vec![
        Case { name: "x^9 on [0,1]", domain: Domain::finite(0.0, 1.0), f: |x| x.powi(9), exact: 0.1 },
        Case { name: "e^x on [0,2]", domain: Domain::finite(0.0, 2.0), f: f64::exp, exact: 2f64.exp() - 1.0 },
        Case { name: "sqrt(x) on [0,1]", domain: Domain::finite(0.0, 1.0), f: f64::sqrt, exact: 2.0 / 3.0 },
        Case { name: "ln(x) on [0,1]", domain: Domain::finite(0.0, 1.0), f: f64::ln, exact: -1.0 },
        Case { name: "x^-1/2 on [0,1]", domain: Domain::finite(0.0, 1.0), f: |x| 1.0 / x.sqrt(), exact: 2.0 },
        Case {
            name: "cos(30x) on [0,1]",
            domain: Domain::finite(0.0, 1.0),
            f: |x| (30.0 * x).cos(),
            exact: 30f64.sin() / 30.0,
        },
        Case {
            name: "1/(1+x^2) on [0,inf)",
            domain: Domain::semi_infinite(0.0),
            f: |x| 1.0 / (1.0 + x * x),
            exact: PI / 2.0,
        },
        Case {
            name: "e^-x^2 on [0,inf)",
            domain: Domain::semi_infinite(0.0),
            f: |x| (-x * x).exp(),
            exact: PI.sqrt() / 2.0,
        },
        Case {
            name: "x^3 e^-x on [0,inf)",
            domain: Domain::semi_infinite(0.0),
            f: |x| x.powi(3) * (-x).exp(),
            exact: 6.0,
        },
        Case {
            name: "1/(1+100(x-0.3)^2) on [0,1]",
            domain: Domain::finite(0.0, 1.0),
            f: |x| 1.0 / (1.0 + 100.0 * (x - 0.3) * (x - 0.3)),
            exact: ((7.0f64).atan() + (3.0f64).atan()) / 10.0,
        },
    ]
}

#[test]
fn reported_errors_bound_true_errors() {
    for tol in [Tolerance::relative(1e-6), Tolerance::relative(1e-10)] {
        let mut honest = 0;
        let mut report = Vec::new();
        for c in battery() {
            let r = integrate(c.f, c.domain, tol).unwrap();
            let err = (r.value - c.exact).abs();
            let ok = err <= r.error_estimate;
            honest += ok as usize;
            report.push(format!("{}: true {err:.1e}, reported {:.1e}", c.name, r.error_estimate));
            assert!(err <= tol.target(c.exact) * 10.0 + 1e-15, "{}", report.last().unwrap());
        }
        assert!(honest >= 9, "only {honest}/10 honest at {tol:?}:\n{}", report.join("\n"));
    }
}

#[test]
fn oscillatory_tail_integrals() {
    // ∫₀^∞ sin x / x dx = π/2 and ∫₀^∞ cos x / (1 + x²) dx = π/(2e)
    let a = integrate_oscillatory(|x| if x == 0.0 { 1.0 } else { x.sin() / x }, 0.0, PI, Tolerance::absolute(1e-10))
        .unwrap();
    let b = integrate_oscillatory(|x| x.cos() / (1.0 + x * x), 0.0, PI, Tolerance::absolute(1e-10)).unwrap();
    for (r, exact) in [(a, PI / 2.0), (b, PI / (2.0 * 1f64.exp()))] {
        let err = (r.value - exact).abs();
        assert!(err < 1e-9);
        assert!(err <= r.error_estimate.max(1e-12));
    }
}

#[test]
fn repeated_runs_are_bit_identical() {
    let f = |x: f64| (-x).exp() * (3.0 * x).cos() / (1.0 + x);
    let first = integrate(f, Domain::semi_infinite(0.0), Tolerance::relative(1e-9)).unwrap();
    for _ in 0..5 {
        let again = integrate(f, Domain::semi_infinite(0.0), Tolerance::relative(1e-9)).unwrap();
        assert_eq!(first.value.to_bits(), again.value.to_bits());
        assert_eq!(first.error_estimate.to_bits(), again.error_estimate.to_bits());
    }
}
