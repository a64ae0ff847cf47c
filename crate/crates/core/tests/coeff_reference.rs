//! Closed forms and the quadrature oracle against reference values
//! computed offline with mpmath (see `tools/gen_coeff_oracle.py`).

use cvdyn::coeffs::{closed_form, oracle_all, OracleOptions, Which};
use cvdyn::spectral::{Family, ReservoirSpec, Temperature};

struct Row {
    family: Family,
    high: bool,
    which: Which,
    x: f64,
    tau: f64,
    value: f64,
}

fn rows() -> Vec<Row> {
    let text = include_str!("data/coeff_oracle.csv");
    text.lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            Row {
                family: f[0].parse().unwrap(),
                high: f[1] == "high",
                which: match f[2] {
                    "delta" => Which::Delta,
                    "pi" => Which::Pi,
                    "gamma" => Which::Gamma,
                    _ => Which::Rren,
                },
                x: f[3].parse().unwrap(),
                tau: f[4].parse().unwrap(),
                value: f[5].parse().unwrap(),
            }
        })
        .collect()
}

fn spec(r: &Row) -> ReservoirSpec {
    // Reference values are for α = 1, θ = 1; use α = 0.5, θ = 10 and rescale.
    let temp = if r.high {
        Temperature::High { theta: 10.0 }
    } else {
        Temperature::Zero
    };
    ReservoirSpec::new(r.family, r.x, 0.5, temp).unwrap()
}

fn scale(r: &Row) -> f64 {
    let t = if r.high && r.which != Which::Gamma {
        10.0
    } else {
        1.0
    };
    0.25 * t
}

#[test]
fn closed_forms_match_reference() {
    let mut worst: f64 = 0.0;
    for r in rows().iter().filter(|r| r.which != Which::Rren) {
        let c = closed_form(&spec(r), r.tau, r.which).unwrap();
        let want = r.value * scale(r);
        let err = (c.value - want).abs() / want.abs().max(1e-12);
        worst = worst.max(err);
        assert!(
            err < 1e-11,
            "{:?} {:?} high={} x={} tau={}: got {} want {} (rel {err:e})",
            r.family,
            r.which,
            r.high,
            r.x,
            r.tau,
            c.value,
            want
        );
    }
    println!("worst relative deviation {worst:e}");
}

#[test]
fn oracle_matches_reference_on_short_times() {
    let opts = OracleOptions::default();
    for r in rows()
        .iter()
        .filter(|r| r.tau <= 2.5 && (r.x == 1.0 || r.x == 0.3))
    {
        let o = oracle_all(&spec(r), r.tau, &opts).unwrap();
        let got = o[match r.which {
            Which::Delta => 0,
            Which::Pi => 1,
            Which::Gamma => 2,
            Which::Rren => 3,
        }];
        let want = r.value * scale(r);
        let err = (got - want).abs() / want.abs().max(1e-10);
        assert!(
            err < 1e-8,
            "{:?} {:?} high={} x={} tau={}: got {got} want {want}",
            r.family,
            r.which,
            r.high,
            r.x,
            r.tau
        );
    }
}
