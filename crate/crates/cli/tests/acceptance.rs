//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion's outcome differs from `EXPECTED_FAILURES`.

#[path = "../../core/tests/support/fock.rs"]
mod fock;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::time::{Duration, Instant};

use num_complex::Complex64;
use qds_cli::analyze::analyze;
use qds_cli::config::{Preset, RunConfig};
use qds_cli::entropy::entropy_table;
use qds_cli::simulate::simulate;
use qds_core::bounds::{nontrivial_length, thresholds, usd_probability};
use qds_core::channel::{calibrate_to_diagonal, Receiver};
use qds_core::coherent::{gram_spectrum, overlap, PhaseAlphabet};
use qds_core::measurement::{outcome_table, square_root_povm};
use qds_core::sim::{run_experiment, AliceStrategy, BobStrategy, FrequencyEstimate, ProtocolConfig};
use qds_core::ChannelModel;

/// Criteria known not to hold, with the reason recorded in the README.
const EXPECTED_FAILURES: &[u32] = &[5];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

type Criterion = (u32, &'static str, fn() -> Outcome);

fn z_score(rate: &FrequencyEstimate, p: f64) -> f64 {
    let sigma = (p * (1.0 - p) / rate.total as f64).sqrt();
    (rate.frequency - p) / sigma
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let (r, _) = analyze(&RunConfig::default()).unwrap();
    let elapsed = start.elapsed();
    let p = &r.passive;
    let pass = (p.p_forgery_lower - 4.70e-3).abs() <= 0.01e-3
        && (p.p_forgery_upper - 4.76e-3).abs() <= 0.01e-3
        && (p.g_lower - 8.03e-4).abs() <= 0.3e-4
        && elapsed < Duration::from_secs(1);
    let d = r.derived.as_ref().unwrap();
    outcome(
        pass,
        format!(
            "cost_lower = {:.4e}, cost_upper = {:.4e}, g_lower = {:.3e} (published bounding rows, {:?}); \
             orbit-rule rows give {:.4e} / {:.4e}, g_lower = {:.3e}",
            p.p_forgery_lower,
            p.p_forgery_upper,
            p.g_lower,
            elapsed,
            d.passive.p_forgery_lower,
            d.passive.p_forgery_upper,
            d.passive.g_lower
        ),
    )
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let (r, _) = analyze(&RunConfig::default()).unwrap();
    let elapsed = start.elapsed();
    let reports = [r.passive.helstrom_lower, r.passive.helstrom_upper];
    let worst_residual = reports
        .iter()
        .map(|h| h.criterion1_residual.max(h.criterion2_residual).max(h.criterion3_residual))
        .fold(0.0, f64::max);
    let min_eig = reports.iter().map(|h| h.criterion4_min_eigenvalue).fold(f64::INFINITY, f64::min);
    let pass = worst_residual < 1e-9 && min_eig > -1e-9 && elapsed < Duration::from_secs(1);
    let d = r.derived.as_ref().unwrap();
    outcome(
        pass,
        format!(
            "max residual = {worst_residual:.2e}, min eigenvalue = {min_eig:.2e} ({elapsed:?}); \
             orbit-rule lower matrix min eigenvalue = {:.2e}",
            d.passive.helstrom_lower.criterion4_min_eigenvalue
        ),
    )
}

fn criterion_3() -> Outcome {
    let (r, _) = analyze(&RunConfig::default()).unwrap();
    let a = &r.amplified;
    outcome(
        (a.p_forgery_lower - 4.61e-3).abs() <= 0.05e-3,
        format!(
            "amplified cost = {:.4e} (upper {:.4e}) at mean photon number {:.3}",
            a.p_forgery_lower, a.p_forgery_upper, a.measured_mean_photons
        ),
    )
}

fn criterion_4() -> Outcome {
    let l = nontrivial_length(8.03e-4).unwrap();
    outcome((l - 4.8e6).abs() <= 0.2e6, format!("L = {l:.4e}"))
}

fn criterion_5() -> Outcome {
    let mut config = RunConfig::default();
    config.entropy.points = 501;
    let rows = entropy_table(&config).unwrap();
    let mut monotone = true;
    let mut starts_at_zero = true;
    let mut deficits = Vec::new();
    for chunk in rows.chunks(501) {
        monotone &= chunk.windows(2).all(|w| w[1].entropy_bits >= w[0].entropy_bits - 1e-12);
        starts_at_zero &= chunk[0].entropy_bits.abs() < 1e-12;
        let last = chunk.last().unwrap();
        deficits.push((last.n_phases, last.log2_n - last.entropy_bits));
    }
    let asymptote = deficits.iter().all(|&(_, d)| d.abs() <= 1e-2);
    outcome(
        monotone && starts_at_zero && asymptote,
        format!(
            "monotone = {monotone}, S(0) = 0: {starts_at_zero}, log2 N − S at mean photon number 50: {}",
            deficits.iter().map(|(n, d)| format!("N={n}: {d:.2e}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

fn criterion_6() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in 2..=8 {
        for mu in [0.01, 0.05, 0.1, 0.16, 0.24, 0.5, 0.75, 1.0] {
            let alphabet = PhaseAlphabet::from_mean_photons(n, mu).unwrap();
            let states = fock::alphabet_states(n, mu, fock::CUTOFF);
            for j in 0..n {
                for k in 0..n {
                    let lib = overlap(alphabet.state(j), alphabet.state(k));
                    let oracle: Complex64 = fock::inner(&states[j], &states[k]);
                    worst = worst.max((lib - oracle).norm());
                }
            }
            let spec = gram_spectrum(&alphabet).unwrap();
            let mut lib: Vec<f64> = spec.eigenvalues().iter().map(|l| l / n as f64).collect();
            lib.sort_by(|a, b| b.total_cmp(a));
            let oracle = fock::eigenvalues_desc(&fock::element_density(n, mu, fock::CUTOFF));
            for (i, v) in lib.iter().enumerate() {
                worst = worst.max((v - oracle[i]).abs());
            }
            let table = outcome_table(&square_root_povm(&spec), &spec).unwrap();
            let oracle = fock::square_root_outcomes(n, mu, fock::CUTOFF);
            for t in 0..n {
                for p in 0..n {
                    worst = worst.max((table[t][p] - oracle[t][p]).abs());
                }
            }
        }
    }
    outcome(worst <= 1e-8, format!("max deviation from Fock oracle (cutoff 40) = {worst:.2e}"))
}

fn calibrated_config(l: usize, bob: BobStrategy) -> ProtocolConfig {
    let alphabet = PhaseAlphabet::from_mean_photons(8, 0.16).unwrap();
    let channel = calibrate_to_diagonal(&alphabet, &ChannelModel::default(), 3.89e-3).unwrap();
    let (s_a, s_v) = thresholds(3.89e-3, 8.03e-4).unwrap();
    let mut c = ProtocolConfig::new(alphabet, channel, s_a, s_v);
    c.signature_length = l;
    c.bob = bob;
    c.master_seed = 7;
    c
}

fn synthetic_config(bob: BobStrategy) -> ProtocolConfig {
    let alphabet = PhaseAlphabet::from_mean_photons(8, 0.2).unwrap();
    let channel = ChannelModel { visibility: 0.95, ..ChannelModel::ideal() };
    let matrix = qds_core::channel::predicted_cost_matrix(&alphabet, &channel).unwrap();
    let spec = gram_spectrum(&alphabet).unwrap();
    let forger = qds_core::measurement::expected_cost(&square_root_povm(&spec), &matrix, &spec).unwrap();
    let p = matrix.max_diagonal();
    let (s_a, s_v) = thresholds(p, forger - p).unwrap();
    let mut c = ProtocolConfig::new(alphabet, channel, s_a, s_v);
    c.signature_length = 10_000;
    c.trials = 1_000;
    c.bob = bob;
    c.master_seed = 17;
    c
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let honest = run_experiment(&calibrated_config(1_000_000, BobStrategy::Honest)).unwrap().summary;
    let diag = honest.analytic.predicted_diagonal;
    let z_bob = z_score(&honest.bob_signal_rate, diag);
    let z_charlie = z_score(&honest.charlie_signal_rate, diag);
    let forger = run_experiment(&calibrated_config(1_000_000, BobStrategy::PassiveForger)).unwrap().summary;
    let cost = forger.analytic.predicted_forger_cost;
    let z_forger = z_score(&forger.charlie_signal_rate, cost);
    let a_ok = z_bob.abs() <= 3.0 && z_charlie.abs() <= 3.0;
    let b_ok = z_forger.abs() <= 3.0;

    let forging = run_experiment(&synthetic_config(BobStrategy::PassiveForger)).unwrap().summary;
    let honest_syn = run_experiment(&synthetic_config(BobStrategy::Honest)).unwrap().summary;
    let c_ok = forging.forgeries.frequency <= forging.analytic.eps_forging
        && honest_syn.repudiations.frequency <= honest_syn.analytic.eps_repudiation;
    let elapsed = start.elapsed();
    outcome(
        a_ok && b_ok && c_ok && elapsed < Duration::from_secs(300),
        format!(
            "(a) diagonal {diag:.4e}: z_bob = {z_bob:+.2}, z_charlie = {z_charlie:+.2}; \
             (b) forger cost {cost:.4e}: z = {z_forger:+.2}; \
             (c) g = {:.4}, M = 1000, L = 1e4: forging {}/1000 vs bound {:.2e}, repudiation {}/1000 vs bound {:.2e}; {:?}",
            forging.analytic.implied_gap,
            forging.forgeries.count,
            forging.analytic.eps_forging,
            honest_syn.repudiations.count,
            honest_syn.analytic.eps_repudiation,
            elapsed
        ),
    )
}

fn criterion_8() -> Outcome {
    let strategies = [
        ("honest", AliceStrategy::Honest),
        ("tamper", AliceStrategy::PhaseTamper { delta_phi: FRAC_PI_2, fraction: 2.0 / 16.0 }),
        ("two-state", AliceStrategy::TwoStateRepudiator { bob_offset: FRAC_PI_4, charlie_offset: -FRAC_PI_4 }),
        ("blocked-bob", AliceStrategy::BlockedInput { receiver: Receiver::Bob }),
        ("blocked-charlie", AliceStrategy::BlockedInput { receiver: Receiver::Charlie }),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, alice) in strategies {
        let alphabet = PhaseAlphabet::from_mean_photons(8, 0.16).unwrap();
        let channel = ChannelModel { dark_cps: 320.0, ..ChannelModel::ideal() };
        let mut c = ProtocolConfig::new(alphabet, channel, 0.01, 0.02);
        c.signature_length = 1_000_000;
        c.alice = alice;
        c.master_seed = 3;
        let s = run_experiment(&c).unwrap().summary;
        let sigma = s.asymmetry_sigma();
        pass &= sigma.abs() <= 4.0;
        parts.push(format!("{name}: {}/{} ({sigma:+.2}σ)", s.only_bob_rate.count, s.only_charlie_rate.count));
    }
    outcome(pass, format!("only-Bob/only-Charlie clicks at L = 1e6: {}", parts.join(", ")))
}

fn preset_report(preset: Preset) -> qds_cli::simulate::SimulationReport {
    let config = RunConfig::default().with_overrides(Some(1), None, Some(preset));
    simulate(&config).unwrap().0
}

fn criterion_9() -> Outcome {
    let factors: Vec<(f64, f64)> = [Preset::TamperPi4, Preset::TamperPi2, Preset::TamperPi]
        .into_iter()
        .map(|p| {
            let f = preset_report(p).null_factor.unwrap();
            (f.empirical_factor.unwrap(), f.predicted.factor_over_honest.unwrap())
        })
        .collect();
    let increasing = factors.windows(2).all(|w| w[1].0 > w[0].0 && w[1].1 > w[0].1);
    let shown: Vec<String> = factors
        .iter()
        .zip(["π/4", "π/2", "π"])
        .map(|((e, p), name)| format!("{name}: {e:.2} (model {p:.2})"))
        .collect();
    outcome(
        increasing,
        format!(
            "null-port factors {} vs experiment 7/11/15; multiport path uncalibrated, V = 0.98, 2 of 16 pulses tampered",
            shown.join(", ")
        ),
    )
}

fn criterion_10() -> Outcome {
    let at = |mu| usd_probability(&PhaseAlphabet::from_mean_photons(8, mu).unwrap()).unwrap();
    let p = at(0.16);
    outcome(
        (1e-9..=1e-7).contains(&p),
        format!("N·min λ = {p:.3e} at mean photon number 0.16 (amplified 0.24: {:.3e})", at(0.24)),
    )
}

fn criterion_11() -> Outcome {
    let r = preset_report(Preset::BlockedInput);
    let s = &r.summary;
    let quarter = r.protocol.channel.multiport_port_click_probability(
        r.protocol.alphabet.mean_photons() / 4.0,
        Receiver::Charlie,
    );
    let z_quarter = z_score(&s.charlie_null_rate, quarter);
    let pass = s.bob_null_rate.frequency < s.charlie_null_rate.frequency
        && s.bob_signal_rate.frequency < s.charlie_signal_rate.frequency
        && z_quarter.abs() <= 4.0;
    outcome(
        pass,
        format!(
            "Bob/Charlie null rate {:.3e}/{:.3e}, signal rate {:.3e}/{:.3e}; Charlie null vs quarter-power prediction z = {z_quarter:+.2}",
            s.bob_null_rate.frequency,
            s.charlie_null_rate.frequency,
            s.bob_signal_rate.frequency,
            s.charlie_signal_rate.frequency
        ),
    )
}

fn main() {
    let criteria: [Criterion; 11] = [
        (1, "minimum-cost reproduction", criterion_1),
        (2, "Helstrom certification", criterion_2),
        (3, "amplified forgery", criterion_3),
        (4, "nontriviality threshold", criterion_4),
        (5, "entropy curve", criterion_5),
        (6, "oracle equivalence", criterion_6),
        (7, "Monte Carlo soundness", criterion_7),
        (8, "repudiation symmetry", criterion_8),
        (9, "tamper null-port factors", criterion_9),
        (10, "USD estimate", criterion_10),
        (11, "blocked-input asymmetry", criterion_11),
    ];
    let mut unexpected = Vec::new();
    for (id, name, check) in criteria {
        let o = check();
        let expected_fail = EXPECTED_FAILURES.contains(&id);
        let tag = match (o.pass, expected_fail) {
            (true, false) => "PASS",
            (false, true) => "FAIL (known)",
            (true, true) => "PASS (listed as known failure)",
            (false, false) => "FAIL",
        };
        println!("acceptance #{id:<2} {name}: {tag} | {}", o.detail);
        if o.pass == expected_fail {
            unexpected.push(id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("acceptance outcomes differ from expectation for {unexpected:?}");
        std::process::exit(1);
    }
}
