use relaydmt::channel_model::{FrameSplit, Shares};
use relaydmt::exponent_oracle::*;
use relaydmt::{Mode, Protocol, KAPPA_HAT};
use std::time::Instant;

const KAPPAS: [f64; 6] = [1.0, 1.5, KAPPA_HAT, 2.0, 3.0, 5.0];

fn r_grid() -> Vec<f64> {
    (0..50).map(|k| k as f64 * 0.02).collect()
}

#[test]
fn oracle_matches_every_fixed_kappa_curve() {
    let t = Instant::now();
    let mut worst = (0.0f64, String::new());
    for protocol in Protocol::ALL {
        for mode in Mode::ALL {
            for relays in 1..=3 {
                for kappa in KAPPAS {
                    for row in compare_fixed_kappa(protocol, mode, relays, kappa, &r_grid(), DEFAULT_GRID_STEP).unwrap() {
                        if row.gap > worst.0 {
                            worst = (row.gap, format!("{protocol} {mode} M={relays} κ={kappa} r={} oracle={} cf={}", row.r, row.oracle, row.closed_form));
                        }
                    }
                }
            }
        }
    }
    eprintln!("worst gap {:.3e} at {} ({:.1?})", worst.0, worst.1, t.elapsed());
    assert!(worst.0 <= 3.0 * DEFAULT_GRID_STEP, "{}", worst.1);
}

#[test]
fn documented_problem_values() {
    let one = Shares::from_kappa(1.0);
    let nsdf = InfProblem::df(Protocol::Nsdf, Mode::Finite, one, 1, 1, 0.25).unwrap();
    assert!((solve_inf(&nsdf, 0.005).unwrap().value - 1.5).abs() < 0.02);
    let naf = InfProblem::af(Protocol::Naf, Mode::Finite, one, 1, 0.25).unwrap();
    assert!((solve_inf(&naf, 0.005).unwrap().value - 1.5).abs() < 0.02);

    let hat = Shares::from_kappa(KAPPA_HAT);
    assert!((assemble_outage_exponent(Protocol::Nsdf, Mode::Finite, 1, hat, 0.0, 0.005).unwrap() - 2.0).abs() < 0.03);
    let fs = FrameSplit::new(2, 1).unwrap().shares();
    assert!((assemble_outage_exponent(Protocol::Osdf, Mode::Finite, 2, fs, 0.2, 0.005).unwrap() - 2.1).abs() < 0.03);
    // OAF at its best frame split
    for mode in Mode::ALL {
        let kappa = relaydmt::dmt_closed_form::optimal_kappa(Protocol::Oaf, mode, 2, 0.3).unwrap();
        let d = assemble_outage_exponent(Protocol::Oaf, mode, 2, Shares::from_kappa(kappa), 0.3, 0.005).unwrap();
        assert!((d - 1.5).abs() < 0.03, "{mode}: κ={kappa} d={d}");
        for k in KAPPAS {
            assert!(assemble_outage_exponent(Protocol::Oaf, mode, 2, Shares::from_kappa(k), 0.3, 0.005).unwrap() <= d + 1e-9);
        }
    }
}

#[test]
fn full_rate_leaves_no_diversity() {
    for protocol in Protocol::ALL {
        for mode in Mode::ALL {
            for kappa in KAPPAS {
                let d = assemble_outage_exponent(protocol, mode, 2, Shares::from_kappa(kappa), 1.0, 0.005).unwrap();
                assert!(d.abs() < 1e-9, "{protocol} {mode} κ={kappa}: {d}");
            }
        }
        let pb = if protocol.is_decode_forward() {
            InfProblem::df(protocol, Mode::Infinite, Shares::from_kappa(1.0), 2, 0, 1.0).unwrap()
        } else {
            InfProblem::af(protocol, Mode::Infinite, Shares::from_kappa(1.0), 2, 1.0).unwrap()
        };
        assert_eq!(solve_inf(&pb, 0.005).unwrap().value, 0.0);
    }
}

#[test]
fn decode_event_exponents() {
    let one = Shares::from_kappa(1.0);
    assert_eq!(decode_exponent(1, 0, 0.25, one).unwrap(), 0.5);
    for r in [0.0, 0.3, 0.5] {
        assert_eq!(decode_exponent(3, 3, r, one).unwrap(), 0.0);
    }
    assert_eq!(decode_exponent(2, 0, 0.7, one).unwrap(), 0.0);
    assert!(decode_exponent(2, 1, 0.7, one).unwrap().is_infinite());
    assert!(decode_exponent(2, 3, 0.1, one).is_err());
}

#[test]
fn reduction_agrees_with_full_grid() {
    let mut cases: Vec<(InfProblem, f64)> = Vec::new();
    for protocol in [Protocol::Nsdf, Protocol::Osdf] {
        for mode in Mode::ALL {
            for m in 0..=3 {
                for (kappa, r) in [(1.0, 0.2), (2.0, 0.45), (3.0, 0.7)] {
                    let step = if m == 3 { 0.05 } else { 0.025 };
                    cases.push((InfProblem::df(protocol, mode, Shares::from_kappa(kappa), 3, m, r).unwrap(), step));
                }
            }
        }
    }
    for protocol in [Protocol::Naf, Protocol::Oaf] {
        for mode in Mode::ALL {
            for relays in 1..=3 {
                for (kappa, r) in [(1.0, 0.2), (2.0, 0.45), (3.0, 0.7)] {
                    cases.push((InfProblem::af(protocol, mode, Shares::from_kappa(kappa), relays, r).unwrap(), 0.02));
                }
            }
        }
    }
    for (pb, step) in cases {
        let reduced = solve_inf(&pb, 0.005).unwrap();
        let full = solve_inf_full(&pb, step).unwrap();
        // rounding a feasible point up to the grid keeps it feasible and costs
        // at most (sum of objective weights)·step
        let weights = pb.objective(&vec![1.0; pb.dimension()]);
        assert!(pb.feasible(&reduced.argmin) && pb.feasible(&full.argmin));
        assert!(full.value >= reduced.value - 1e-9, "{pb:?}: full {} < reduced {}", full.value, reduced.value);
        assert!(full.value <= reduced.value + weights * step + 1e-9, "{pb:?}: full {} reduced {}", full.value, reduced.value);
    }
}

#[test]
fn halving_the_grid_step_barely_moves_the_value() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let protocol = Protocol::ALL[rng.random_range(0..4)];
        let mode = Mode::ALL[rng.random_range(0..2)];
        let relays = rng.random_range(1..=3);
        let shares = Shares::from_kappa(rng.random_range(1.0..5.0));
        let r = rng.random_range(0.0..1.0);
        let a = assemble_outage_exponent(protocol, mode, relays, shares, r, 0.01).unwrap();
        let b = assemble_outage_exponent(protocol, mode, relays, shares, r, 0.005).unwrap();
        assert!((a - b).abs() < 2.0 * 0.01, "{protocol} {mode} M={relays} r={r}: {a} vs {b}");
    }
}

#[test]
fn naf_finite_minimiser_follows_the_perturbation_path() {
    // boundary points α_0 = 1−r+δ, β = 1−r−(p/q)δ keep the constraint tight
    let shares = Shares::from_kappa(2.0);
    for r in [0.1, 0.2, 0.3] {
        let pb = InfProblem::af(Protocol::Naf, Mode::Finite, shares, 1, r).unwrap();
        let sol = solve_inf(&pb, 0.005).unwrap();
        let (a0, beta) = (sol.argmin[0], sol.argmin[2]);
        let delta = a0 - (1.0 - r);
        assert!(delta >= -0.005, "r={r}: α_0 = {a0}");
        let on_path = 1.0 - r - shares.p / shares.q * delta;
        assert!((beta - on_path).abs() < 0.01, "r={r}: β = {beta}, path {on_path}");
        assert!((pb.constraint(&sol.argmin) - r).abs() < 1e-6);
    }
}

#[test]
fn slope_regression() {
    let snr: Vec<f64> = (0..7).map(|k| 30.0 + 5.0 * k as f64).collect();
    let exact: Vec<f64> = snr.iter().map(|s| 10f64.powf(-2.0 * s / 10.0)).collect();
    assert!((regress_slope(&snr, &exact).unwrap() - 2.0).abs() < 1e-12);
    assert!(regress_slope(&snr, &vec![0.3; snr.len()]).unwrap().abs() < 1e-12);

    use rand::SeedableRng;
    use rand_distr::{Distribution, Normal};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    let noise = Normal::new(0.0, 0.05).unwrap();
    let noisy: Vec<f64> = snr
        .iter()
        .map(|s| {
            let rho = 10f64.powf(s / 10.0);
            3.0 * rho.powf(-1.5) * (1.0 + 1.0 / rho.ln()) * (1.0 + noise.sample(&mut rng))
        })
        .collect();
    assert!((regress_slope(&snr, &noisy).unwrap() - 1.5).abs() < 0.1);

    assert!(regress_slope(&snr[..2], &exact[..2]).is_err());
    let mut holes = exact.clone();
    holes[3] = 0.0;
    assert!(regress_slope(&snr, &holes).is_err());
}

#[test]
fn log_corrected_regression_recovers_prefactor_power() {
    let snr: Vec<f64> = (0..13).map(|k| 30.0 + 2.5 * k as f64).collect();
    for (d, k) in [(1.5, 2.0), (1.25, 0.0), (0.5, -1.0)] {
        let p: Vec<f64> = snr
            .iter()
            .map(|s| {
                let rho = 10f64.powf(s / 10.0);
                0.2 * rho.powf(-d) * rho.ln().powf(k)
            })
            .collect();
        let rel: Vec<f64> = (0..snr.len()).map(|i| 0.01 + 0.002 * i as f64).collect();
        for w in [None, Some(rel.as_slice())] {
            let fit = regress_slope_polylog(&snr, &p, w).unwrap();
            assert!((fit.slope - d).abs() < 1e-8, "{fit:?}");
            assert!((fit.log_power - k).abs() < 1e-6, "{fit:?}");
        }
    }
    assert!(regress_slope_polylog(&snr[..3], &[1e-3, 1e-4, 1e-5], None).is_err());
    assert!(regress_slope_polylog(&snr[..4], &[1e-3, 0.0, 1e-5, 1e-6], None).is_err());
}

#[test]
fn comparison_csv_has_one_row_per_r() {
    let rows = compare_fixed_kappa(Protocol::Nsdf, Mode::Finite, 1, KAPPA_HAT, &r_grid(), 0.005).unwrap();
    let csv = rows_csv(&rows);
    assert!(csv.starts_with("r,oracle_d,closed_form_d,abs_gap,decoded,argmin\n"));
    assert_eq!(csv.lines().count(), 51);
}
