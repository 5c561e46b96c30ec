//! Acceptance run: criteria 1-15 at their stated sample sizes.
//!
//! Prints one line per criterion. Tolerances are pinned here and applied to
//! the report values, independently of the verdicts the registry computes.
//! A criterion listed in `BLOCKED` still prints FAIL when it fails but does
//! not fail the process.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rde_lab::output::read_tail_curve;
use rde_lab::{run, CheckRecord, Command, RunConfig, VerificationReport};

const SEED: u64 = 1;
const WORKERS: usize = 8;
/// Replicas per check for the two determinism runs.
const DETERMINISM_REPLICAS: usize = 200;

/// Parts that cannot pass at the stated scale, with the reason.
const BLOCKED: &[(u8, &str)] = &[(
    10,
    "kappa=0.5 control: E X(t)/t decays like t^(kappa-1), about 0.03 at t=1000, above the 0.02 band",
)];

struct Criterion {
    id: u8,
    title: &'static str,
    checks: &'static [&'static str],
    /// Checks whose failure is covered by `BLOCKED`.
    blocked_parts: &'static [&'static str],
    verify: fn(&Ctx) -> Vec<Item>,
}

struct Ctx<'a> {
    report: &'a VerificationReport,
    dir: &'a Path,
}

impl Ctx<'_> {
    fn rec(&self, name: &str) -> &CheckRecord {
        self.report.record(name).unwrap_or_else(|| panic!("check {name} missing from report"))
    }

    fn detail(&self, name: &str, key: &str) -> f64 {
        *self.rec(name).details.get(key).unwrap_or_else(|| panic!("{name} has no detail {key}"))
    }
}

/// `(owning check, rendered value, within tolerance)`.
type Item = (&'static str, String, bool);

fn item(check: &'static str, label: &str, value: f64, ok: bool) -> Item {
    (check, format!("{label}={value:.4e}"), ok)
}

fn criteria() -> Vec<Criterion> {
    vec![
        Criterion { id: 1, title: "Dufresne S(inf), kappa=2", checks: &["dufresne"], blocked_parts: &[], verify: |c| {
            let ks = c.rec("dufresne").statistic;
            let m = c.detail("dufresne", "mean_rel_error");
            vec![item("dufresne", "ks", ks, ks < 0.015), item("dufresne", "mean_rel_err", m, m < 0.02)]
        }},
        Criterion { id: 2, title: "Getoor-Sharpe z=0.5 u=0.5", checks: &["getoor_sharpe"], blocked_parts: &[], verify: |c| {
            let e = c.rec("getoor_sharpe").statistic;
            let cf = c.detail("getoor_sharpe", "closed_form");
            vec![item("getoor_sharpe", "rel_err", e, e < 0.005), item("getoor_sharpe", "closed_form_minus_e", cf - std::f64::consts::E, (cf - std::f64::consts::E).abs() < 1e-12)]
        }},
        Criterion { id: 3, title: "Ray-Knight L0 at sigma(1)", checks: &["ray_knight"], blocked_parts: &[], verify: |c| {
            let ks = c.rec("ray_knight").statistic;
            let m = c.detail("ray_knight", "mean_rel_error");
            vec![item("ray_knight", "ks", ks, ks < 0.03), item("ray_knight", "mean_rel_err", m, m < 0.03)]
        }},
        Criterion { id: 4, title: "Biane-Yor 1/2-stable", checks: &["biane_yor"], blocked_parts: &[], verify: |c| {
            let ks = c.rec("biane_yor").statistic;
            vec![item("biane_yor", "ks", ks, ks < 0.02)]
        }},
        Criterion { id: 5, title: "Cauchy identity", checks: &["cauchy"], blocked_parts: &[], verify: |c| {
            let ks = c.rec("cauchy").statistic;
            vec![item("cauchy", "ks", ks, ks < 0.03)]
        }},
        Criterion { id: 6, title: "Warren-Yor and BESQ additivity", checks: &["warren_yor", "besq_additivity"], blocked_parts: &[], verify: |c| {
            let a = c.rec("warren_yor").statistic;
            let b = c.rec("besq_additivity").statistic;
            vec![item("warren_yor", "ks_warren_yor", a, a < 0.02), item("besq_additivity", "ks_additivity", b, b < 0.02)]
        }},
        Criterion { id: 7, title: "T_1/2 mean, kappa=2", checks: &["t_half_moment"], blocked_parts: &[], verify: |c| {
            let e = c.rec("t_half_moment").statistic;
            let s = c.detail("t_half_moment", "series_abs_error");
            vec![item("t_half_moment", "rel_err", e, e < 0.02), item("t_half_moment", "series_err", s, s < 1e-6)]
        }},
        Criterion { id: 8, title: "Hypergeometric Laplace transform", checks: &["hypergeom_laplace"], blocked_parts: &[], verify: |c| {
            let e = c.rec("hypergeom_laplace").statistic;
            vec![item("hypergeom_laplace", "rel_err", e, e < 0.01)]
        }},
        Criterion { id: 9, title: "Upsilon tail exponent", checks: &["upsilon_tail", "upsilon_ratio"], blocked_parts: &[], verify: |c| {
            let slope = c.rec("upsilon_tail").statistic;
            let z = c.detail("upsilon_ratio", "z");
            let on_disk = read_tail_curve(&c.dir.join("tails.csv")).map(|t| t.points.len() == 4).unwrap_or(false);
            vec![
                item("upsilon_tail", "slope", slope, (slope - (-0.5)).abs() <= 0.35),
                item("upsilon_ratio", "ratio_z", z, z.abs() <= 2.0),
                item("upsilon_tail", "tails_csv_rows", 4.0, on_disk),
            ]
        }},
        Criterion { id: 10, title: "Speed", checks: &["speed", "speed_control"], blocked_parts: &["speed_control"], verify: |c| {
            let v = c.rec("speed").statistic;
            let ctl = c.rec("speed_control").statistic;
            vec![item("speed", "speed_k3", v, (0.45..=0.55).contains(&v)), item("speed_control", "control_k0.5", ctl, ctl.abs() < 0.02)]
        }},
        Criterion { id: 11, title: "H tails (informational)", checks: &["h_tail"], blocked_parts: &[], verify: |c| {
            let slope = c.rec("h_tail").statistic;
            let dec = read_tail_curve(&c.dir.join("tails_h.csv"))
                .map(|t| t.points.windows(2).all(|w| w[1].p_hat < w[0].p_hat))
                .unwrap_or(false);
            vec![item("h_tail", "slope", slope, (-1.0..=0.0).contains(&slope)), item("h_tail", "strictly_decreasing", dec as u8 as f64, dec)]
        }},
        Criterion { id: 12, title: "Sturm-Liouville vs MC", checks: &["sturm"], blocked_parts: &[], verify: |c| {
            let e = c.rec("sturm").statistic;
            let x = c.detail("sturm", "cross_rel_error");
            vec![item("sturm", "mc_rel_err", e, e < 0.02), item("sturm", "cross_rel_err", x, x < 0.005)]
        }},
        Criterion { id: 13, title: "Sup law of BESQ(0)", checks: &["sup_law"], blocked_parts: &[], verify: |c| {
            [2.0, 4.0, 8.0]
                .iter()
                .map(|u| {
                    let e = c.detail("sup_law", &format!("rel_error_u{u}"));
                    item("sup_law", &format!("rel_err_u{u}"), e, e < 0.05)
                })
                .collect()
        }},
        Criterion { id: 14, title: "Perpetuity d=6 b=4", checks: &["perpetuity"], blocked_parts: &[], verify: |c| {
            let ks = c.rec("perpetuity").statistic;
            let lo = c.detail("perpetuity", "moment_q0.5_rel_error");
            let share = c.detail("perpetuity", "max_share_q3");
            vec![item("perpetuity", "ks", ks, ks < 0.03), item("perpetuity", "moment_q0.5_err", lo, lo < 0.05), item("perpetuity", "max_share_q3", share, share > 0.1)]
        }},
    ]
}

fn config(dir: PathBuf, workers: usize, suite: Vec<String>, replicas: Option<usize>) -> RunConfig {
    let mut cfg = RunConfig::new(Command::All);
    cfg.seed = SEED;
    cfg.workers = workers;
    cfg.output_dir = Some(dir);
    cfg.suite = suite;
    cfg.replicas = replicas;
    cfg
}

fn csv_bodies(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for e in fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.extension().is_some_and(|x| x == "csv") {
            out.insert(p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap());
        }
    }
    out
}

fn determinism(root: &Path) -> (bool, String) {
    let mut bodies = Vec::new();
    for w in [1, 8] {
        let dir = root.join(format!("determinism_w{w}"));
        let _ = fs::remove_dir_all(&dir);
        run(&config(dir.clone(), w, Vec::new(), Some(DETERMINISM_REPLICAS))).expect("determinism run");
        bodies.push(csv_bodies(&dir));
    }
    let same = bodies[0] == bodies[1];
    let differing: Vec<&String> = bodies[0].keys().filter(|k| bodies[0].get(*k) != bodies[1].get(*k)).collect();
    (same && !bodies[0].is_empty(), format!("files={} replicas={} differing={differing:?}", bodies[0].len(), DETERMINISM_REPLICAS))
}

fn main() {
    let root = Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    let dir = root.join("full");
    let _ = fs::remove_dir_all(&dir);
    let crits = criteria();
    let suite: Vec<String> = crits.iter().flat_map(|c| c.checks.iter().map(|s| s.to_string())).collect();

    let t0 = Instant::now();
    let report = run(&config(dir.clone(), WORKERS, suite, None)).expect("acceptance run");
    let ctx = Ctx { report: &report, dir: &dir };

    let mut hard_fail = false;
    for c in &crits {
        let items = (c.verify)(&ctx);
        let pass = items.iter().all(|i| i.2);
        let secs: f64 = c.checks.iter().map(|n| ctx.rec(n).runtime_s).sum();
        let blocked = BLOCKED.iter().find(|b| b.0 == c.id);
        let only_blocked_failed = items.iter().filter(|i| !i.2).all(|i| c.blocked_parts.contains(&i.0));
        let status = match (pass, blocked) {
            (true, _) => "PASS".to_string(),
            (false, Some(b)) if only_blocked_failed => format!("FAIL (blocked: {}; see decisions ledger)", b.1),
            _ => {
                hard_fail = true;
                "FAIL".to_string()
            }
        };
        let detail: Vec<String> = items.iter().map(|i| format!("{}{}", i.1, if i.2 { "" } else { "!" })).collect();
        println!("criterion {:>2} {:<34} {status} [{}] {secs:.1}s", c.id, c.title, detail.join(" "));
    }

    let (same, note) = determinism(&root);
    if !same {
        hard_fail = true;
    }
    println!(
        "criterion 15 {:<34} {} [{note}]",
        "Determinism, workers 1 vs 8",
        if same { "PASS" } else { "FAIL" }
    );
    println!("acceptance total {:.1}s", t0.elapsed().as_secs_f64());
    if hard_fail {
        std::process::exit(1);
    }
}
