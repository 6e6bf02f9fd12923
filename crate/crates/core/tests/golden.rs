//! γ_λ regression values. Regenerate with TANGLELAB_BLESS=1 after a verified
//! change to the shooting code.

use std::path::PathBuf;

use tanglelab_core::homoclinic::{shoot_gamma_with, ShootingOptions};

const LAMBDAS: [f64; 4] = [0.01, 0.025, 0.05, 0.1];
const ROOT_TOL: f64 = 1e-13;

fn path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("golden/gamma_lambda.txt")
}

fn parse(text: &str) -> Vec<(f64, f64)> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            let v: Vec<f64> = l.split_whitespace().map(|t| t.parse().expect("number")).collect();
            assert_eq!(v.len(), 2, "bad line: {l}");
            (v[0], v[1])
        })
        .collect()
}

fn render(rows: &[(f64, f64)]) -> String {
    let mut s = String::from("# lambda gamma_lambda (Dopri5 tol 1e-12, seed 1e-8, root tol 1e-13)\n");
    for (l, g) in rows {
        s.push_str(&format!("{l} {g:.12e}\n"));
    }
    s
}

fn shoot(lambda: f64, tol: f64) -> f64 {
    shoot_gamma_with(lambda, ROOT_TOL, &ShootingOptions { tol, ..Default::default() }).unwrap()
}

#[test]
fn parse_render_round_trip() {
    let rows = vec![(0.05, 0.062495722912345), (0.1, -1.5e-3)];
    let back = parse(&render(&rows));
    for (a, b) in rows.iter().zip(&back) {
        assert_eq!(a.0, b.0);
        assert!((a.1 - b.1).abs() < 1e-12 * a.1.abs());
    }
}

#[test]
fn gamma_lambda_matches_golden() {
    let fresh: Vec<(f64, f64)> = LAMBDAS.iter().map(|&l| (l, shoot(l, 1e-12))).collect();
    if std::env::var_os("TANGLELAB_BLESS").is_some() {
        std::fs::write(path(), render(&fresh)).unwrap();
        return;
    }
    let stored = parse(&std::fs::read_to_string(path()).expect("golden file"));
    assert_eq!(stored.len(), fresh.len());
    for ((l0, g0), (l1, g1)) in stored.iter().zip(&fresh) {
        assert_eq!(l0, l1);
        assert!((g0 - g1).abs() < 1e-10, "lambda {l0}: stored {g0}, now {g1}");
        assert!(g1.abs() < 10.0 * l1);
    }
}

#[test]
fn gamma_lambda_independent_of_integrator_tolerance() {
    for l in [0.025, 0.05] {
        let (g10, g12) = (shoot(l, 1e-10), shoot(l, 1e-12));
        assert!((g10 - g12).abs() < 1e-10, "lambda {l}: {g10} vs {g12}");
    }
}
