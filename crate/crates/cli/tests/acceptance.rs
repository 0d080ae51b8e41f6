//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use coherent_qkd::adversary::{StrategyConfig, StrategyKind};
use coherent_qkd::analytics::{
    beamsplit_leakage, fig3_curves, default_fig3_grid, info_2, info_42, qber_2, qber_42, rate_2,
    rate_4, rate_42, EavesdropFraction, ProtocolKind,
};
use coherent_qkd::quantum_math::{
    multiphoton_fraction, overlap_angle, MeanPhotonNumber, PhotonDistribution,
};
use coherent_qkd::sim::{run_session, ProtocolConfig};
use coherent_qkd_cli::report::CsvReport;

const SEED: u64 = 1;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn mu(x: f64) -> MeanPhotonNumber {
    MeanPhotonNumber::new(x).unwrap()
}

fn cli(args: &[&str]) -> (i32, Vec<u8>) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = coherent_qkd_cli::run(
        std::iter::once("cohqkd").chain(args.iter().copied()),
        &mut out,
        &mut err,
    );
    if code != 0 {
        eprintln!("{}", String::from_utf8_lossy(&err));
    }
    (code, out)
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let v = f();
    (v, start.elapsed())
}

fn attacked(protocol: ProtocolKind, m: f64, n: u64, kind: StrategyKind, eta: f64) -> ProtocolConfig {
    let mut cfg = ProtocolConfig::new(protocol, mu(m), n, SEED);
    cfg.strategy = Some(StrategyConfig::new(kind, eta).unwrap());
    cfg
}

fn beam_split_bound() -> Verdict {
    let (bits, t) = timed(|| beamsplit_leakage(mu(0.1), 0.9).unwrap());
    verdict(
        (0.225..=0.235).contains(&bits) && t < Duration::from_millis(1),
        format!("beam-split bound {bits:.6} bits in [0.225, 0.235], {t:?} < 1 ms"),
    )
}

fn multiphoton_statistics() -> Verdict {
    let (f, t) = timed(|| multiphoton_fraction(&PhotonDistribution::poisson(0.1).unwrap()));
    let cond = f.given_nonzero.unwrap();
    let ok = (cond - 0.05).abs() <= 0.1 * 0.05
        && (f.p_multi - 0.005).abs() <= 0.1 * 0.005
        && t < Duration::from_millis(1);
    verdict(
        ok,
        format!(
            "P(n>=2|n>=1) = {cond:.6} (1/20 +-10%), P(n>=2) = {:.6} (1/200 +-10%), {t:?} < 1 ms",
            f.p_multi
        ),
    )
}

fn pns_scenario() -> Verdict {
    let run = |source: &str| {
        timed(|| {
            cli(&[
                "attack", "--strategy", "pns", "--source", source, "--mu", "0.1", "--loss-db",
                "10", "--n-pulses", "1000000", "--seed", "1",
            ])
        })
    };
    let ((pc, poisson), tp) = run("poisson");
    let ((tc, thermal), tt) = run("thermal");
    if pc != 0 || tc != 0 {
        return verdict(false, format!("attack exited with {pc} / {tc}"));
    }
    let p = CsvReport::parse(&poisson).unwrap();
    let t = CsvReport::parse(&thermal).unwrap();
    let known_p = p.number(0, "eve_known_fraction").unwrap();
    let qber_p = p.number(0, "induced_qber").unwrap();
    let known_t = t.number(0, "eve_known_fraction").unwrap();
    let qber_t = t.number(0, "induced_qber").unwrap();
    let limit = Duration::from_secs(30);
    verdict(
        known_p >= 0.45 && qber_p == 0.0 && known_t >= 0.9 && qber_t == 0.0 && tp < limit && tt < limit,
        format!(
            "poisson: Eve knows {known_p:.4} (>= 0.45), qber {qber_p}; thermal: {known_t:.4} (>= 0.9), qber {qber_t}; {tp:.1?}, {tt:.1?} < 30 s"
        ),
    )
}

fn four_state_intercept() -> Verdict {
    let cfg = attacked(
        ProtocolKind::FourState,
        0.1,
        1_000_000,
        StrategyKind::InterceptResendConjugate,
        1.0,
    );
    let (r, t) = timed(|| run_session(&cfg).unwrap());
    let q = r.qber.unwrap();
    let z = q.z_score(0.25);
    let (ae, eb) = (r.i_ae.unwrap().bits, r.i_eb.unwrap().bits);
    verdict(
        z.abs() <= 3.0
            && (ae - 0.5).abs() <= 0.01
            && (eb - 0.5).abs() <= 0.01
            && t < Duration::from_secs(30),
        format!(
            "qber {:.5} (z {z:+.2} vs 0.25), I_AE {ae:.4}, I_EB {eb:.4} (0.5 +- 0.01), {t:.1?} < 30 s",
            q.value
        ),
    )
}

const GRID_N: u64 = 300_000;

fn two_state_agreement() -> Verdict {
    let mut ok = true;
    let mut worst = (0.0f64, 0.0f64);
    let mut disagreements = 0;
    for m in [0.05, 0.1, 0.2] {
        for eta in [0.3, 1.0] {
            let cfg = attacked(
                ProtocolKind::TwoState,
                m,
                GRID_N,
                StrategyKind::InterceptResendSymmetric,
                eta,
            );
            let r = run_session(&cfg).unwrap();
            let delta = overlap_angle(mu(m));
            let q = qber_2(EavesdropFraction::new(eta).unwrap(), delta);
            let info = info_2(q, delta).unwrap();
            let zq = r.qber.unwrap().z_score(q.value());
            let zi = r.i_ae.unwrap().z_score(info.i_ae);
            let eb = r.eve_bob_attacked.unwrap();
            ok &= zq.abs() <= 3.0 && zi.abs() <= 3.0;
            ok &= eb.known == eb.attacked && eb.disagreements == 0 && eb.capacity() == Some(1.0);
            disagreements += eb.disagreements;
            worst = (worst.0.max(zq.abs()), worst.1.max(zi.abs()));
        }
    }
    verdict(
        ok,
        format!(
            "6 runs: max |z| qber {:.2}, I_AE {:.2}; Eve-Bob disagreements on attacked bits {disagreements}",
            worst.0, worst.1
        ),
    )
}

fn four_plus_two_agreement() -> Verdict {
    let mut ok = true;
    let mut worst = [0.0f64; 3];
    for m in [0.05, 0.1, 0.2] {
        for eta in [0.3, 1.0] {
            let cfg = attacked(
                ProtocolKind::FourPlusTwo,
                m,
                GRID_N,
                StrategyKind::InterceptResendConjugate,
                eta,
            );
            let r = run_session(&cfg).unwrap();
            let delta = overlap_angle(mu(m));
            let q = qber_42(EavesdropFraction::new(eta).unwrap(), delta);
            let info = info_42(q, delta).unwrap();
            let z = [
                r.qber.unwrap().z_score(q.value()),
                r.i_ae.unwrap().z_score(info.i_ae),
                r.i_eb.unwrap().z_score(info.i_eb),
            ];
            for (w, z) in worst.iter_mut().zip(z) {
                ok &= z.abs() <= 3.0;
                *w = w.max(z.abs());
            }
        }
    }
    verdict(
        ok,
        format!(
            "6 runs: max |z| qber {:.2}, I_AE {:.2}, I_EB {:.2}",
            worst[0], worst[1], worst[2]
        ),
    )
}

fn fig3_ordering() -> Verdict {
    let grid = default_fig3_grid();
    let rows = fig3_curves(&grid);
    let mut ok = grid.len() == 50;
    let mut below = false;
    let mut above = false;
    for row in &rows {
        let (Some(two), Some(four_two)) = (row.two_state, row.four_plus_two) else {
            ok = false;
            continue;
        };
        ok &= four_two.norm_i_ae < 1.0 && four_two.norm_i_ae < two.norm_i_ae;
        ok &= (0.5..=1.0).contains(&four_two.norm_i_eb);
        below |= two.norm_i_ae < 1.0;
        above |= two.norm_i_ae > 1.0;
    }
    let first_below = rows[0].two_state.is_some_and(|p| p.norm_i_ae < 1.0);
    let last_above = rows[49].two_state.is_some_and(|p| p.norm_i_ae > 1.0);
    verdict(
        ok && below && above && first_below && last_above,
        format!(
            "{} points: 4+2 I_AE < 1 and < 2-state everywhere, 4+2 I_EB in [0.5, 1]; 2-state I_AE crosses 1 ({first_below}/{last_above})",
            rows.len()
        ),
    )
}

fn b92_unambiguity() -> Verdict {
    let r = run_session(&ProtocolConfig::new(ProtocolKind::TwoState, mu(0.1), 1_000_000, SEED)).unwrap();
    let q = r.qber.unwrap();
    verdict(
        q.errors == 0,
        format!("{} conclusive bits, {} opposite-bit events", q.length, q.errors),
    )
}

fn rate_formulas() -> Verdict {
    let n = 1_000_000u64;
    let mut ok = true;
    let mut worst = 0.0f64;
    for m in [0.05, 0.1, 0.2] {
        for (protocol, rate) in [
            (ProtocolKind::FourState, rate_4(mu(m))),
            (ProtocolKind::TwoState, rate_2(mu(m))),
            (ProtocolKind::FourPlusTwo, rate_42(mu(m))),
        ] {
            let r = run_session(&ProtocolConfig::new(protocol, mu(m), n, SEED)).unwrap();
            let k = r.key.len() as f64;
            let z = (k - n as f64 * rate) / (n as f64 * rate * (1.0 - rate)).sqrt();
            ok &= z.abs() <= 3.0;
            worst = worst.max(z.abs());
        }
    }
    let exact = [0.0, 0.01, 0.05, 0.1, 0.2, 1.0, 7.5]
        .iter()
        .all(|&m| rate_42(mu(m)) == rate_2(mu(m)) / 2.0);
    verdict(
        ok && exact,
        format!("9 sessions, max |z| {worst:.2}; rate_42 == rate_2 / 2 exactly: {exact}"),
    )
}

fn determinism() -> Verdict {
    let runs = [
        vec![
            "simulate", "--protocol", "4+2", "--strategy", "povm", "--eta", "0.5", "--grid",
            "0.05,0.2", "--n-pulses", "200000", "--seed", "42",
        ],
        vec![
            "attack", "--strategy", "pns", "--mu", "0.1", "--loss-db", "10", "--n-pulses",
            "200000", "--seed", "42",
        ],
    ];
    let mut ok = true;
    let mut bytes = 0;
    for args in runs {
        let mut outputs = Vec::new();
        for threads in ["1", "4", "1"] {
            let mut a = args.clone();
            a.extend(["--threads", threads]);
            let (code, out) = cli(&a);
            ok &= code == 0;
            outputs.push(out);
        }
        ok &= outputs.windows(2).all(|w| w[0] == w[1]) && !outputs[0].is_empty();
        bytes += outputs[0].len();
    }
    verdict(
        ok,
        format!("simulate and attack CSV byte-identical across 1/4/1 threads ({bytes} bytes)"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Verdict); 10] = [
        ("beam-split bound", beam_split_bound),
        ("multiphoton statistics", multiphoton_statistics),
        ("PNS scenario", pns_scenario),
        ("4-state intercept/resend", four_state_intercept),
        ("2-state agreement", two_state_agreement),
        ("4+2 agreement", four_plus_two_agreement),
        ("Fig. 3 ordering", fig3_ordering),
        ("B92 unambiguity", b92_unambiguity),
        ("rate formulas", rate_formulas),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let v = check();
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("{tag} criterion {}: {name}: {}", i + 1, v.detail);
        failed += !v.pass as usize;
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
