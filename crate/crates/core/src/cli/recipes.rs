//! Built-in experiments. Each writes its artifacts into the output directory and returns the
//! pass/fail items collected in `summary.json`.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex;
use rayon::prelude::*;
use serde_json::{json, Value};

use super::config::{Recipe, RunConfig};
use super::output::{arc_json, pair_json, read_json, sample_points, write_json};
use crate::construct::basic::point_mass;
use crate::construct::clark::clark_function;
use crate::construct::nomoc::{build_nomoc, verify_moc_bound};
use crate::construct::nosupp::build_nosupp;
use crate::construct::riesz::{build_riesz, witness_search};
use crate::criteria::{
    carleson_sum, cyclicity_constant, exp_zygmund_constant, support_hull, w1_report, zygmund_seminorm, QuadOptions, TailReport,
    Verdict, W1Report,
};
use crate::dyadic::{measure_dump, DyadicClosedSet, DyadicMeasure};
use crate::error::{BlochError, Result};
use crate::majorant::Majorant;
use crate::rational::{fmt_f64, int, json_f64, ratio, to_f64, to_json_pair};
use crate::transform::{bloch_seminorm_sample, growth_scan, singular_inner, transform, AtomizeOptions, DiscPoint, Kernel};
use crate::DiscPoint64;

/// Largest relative change of the W¹ partial sums over the last two levels for a pass.
pub const W1_MAX_LAST_CHANGE: f64 = 0.05;
/// `δ` of the witness search and of the growth scan.
const RIESZ_DELTA: (i64, i64) = (1, 2);
const GROWTH_DELTA: f64 = 0.05;

#[derive(Clone, Debug, PartialEq)]
pub struct Item {
    pub name: &'static str,
    pub passed: bool,
}

#[derive(Clone, Debug)]
pub struct RecipeOutcome {
    pub recipe: Recipe,
    /// Effective parameters after defaults.
    pub params: Value,
    pub items: Vec<Item>,
    pub files: Vec<String>,
}

impl RecipeOutcome {
    pub fn passed(&self) -> bool {
        self.items.iter().all(|i| i.passed)
    }

    pub fn summary(&self) -> Value {
        json!({
            "recipe": self.recipe.as_str(),
            "params": self.params,
            "items": self.items.iter().map(|i| json!({ "name": i.name, "passed": i.passed })).collect::<Vec<_>>(),
            "passed": self.passed(),
            "files": self.files,
        })
    }
}

struct Artifacts {
    dir: PathBuf,
    files: Vec<String>,
}

impl Artifacts {
    fn json(&mut self, name: &str, v: &Value) -> Result<()> {
        write_json(&self.dir.join(name), v)?;
        self.files.push(name.into());
        Ok(())
    }

    fn text(&mut self, name: &str, s: &str) -> Result<()> {
        fs::write(self.dir.join(name), s)?;
        self.files.push(name.into());
        Ok(())
    }

    /// `<stem>.csv` with the per-level table and `<stem>.json` with the verdict.
    fn tail(&mut self, stem: &str, report: &TailReport, extra: Value) -> Result<()> {
        self.text(&format!("{stem}.csv"), &report.to_csv())?;
        let mut v = report.to_json();
        if let (Value::Object(m), Value::Object(e)) = (&mut v, extra) {
            m.extend(e);
        }
        self.json(&format!("{stem}.json"), &v)
    }

    fn w1(&mut self, w1: &W1Report) -> Result<()> {
        let extra = json!({
            "boxes": w1.boxes,
            "last_relative_change": json_f64(w1.report.last_relative_change()),
            "per_level_error": w1.per_level_error.iter().map(|e| json_f64(*e)).collect::<Vec<_>>(),
        });
        self.tail("w1_report", &w1.report, extra)
    }
}

/// Converging verdict, clean quadrature flags and a settled partial sum.
pub fn w1_passes(report: &TailReport) -> bool {
    report.verdict == Verdict::Converging && report.last_relative_change() < W1_MAX_LAST_CHANGE
}

fn usage(key: &str, e: BlochError) -> BlochError {
    BlochError::InvalidArgument(format!("{key}: {e}"))
}

fn quad(cfg: &RunConfig) -> QuadOptions {
    QuadOptions { nodes: cfg.quad.unwrap_or(QuadOptions::default().nodes), ..QuadOptions::default() }
}

/// Runs the recipe on a pool of `cfg.workers` threads and writes `summary.json`.
pub fn run_recipe(cfg: &RunConfig) -> Result<RecipeOutcome> {
    if cfg.quad == Some(0) {
        return Err(BlochError::InvalidArgument("quad: needs at least one node".into()));
    }
    fs::create_dir_all(&cfg.out_dir)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| BlochError::InvalidArgument(format!("workers: {e}")))?;
    let mut art = Artifacts { dir: cfg.out_dir.clone(), files: Vec::new() };
    let (params, items) = pool.install(|| match cfg.recipe {
        Recipe::NomocThm14 => nomoc(cfg, &mut art),
        Recipe::NosuppThm15 => nosupp(cfg, &mut art),
        Recipe::RieszLemma53 => riesz(cfg, &mut art),
        Recipe::ClarkProp52 => clark(cfg, &mut art),
        Recipe::AtomBaseline => atom(cfg, &mut art),
    })?;
    let mut outcome = RecipeOutcome { recipe: cfg.recipe, params, items, files: art.files };
    outcome.files.push("summary.json".into());
    write_json(&cfg.out_dir.join("summary.json"), &outcome.summary())?;
    Ok(outcome)
}

/// `S` and `S'` at seeded sample points with `1 - |z| ≥ 2^-8`.
fn singular_samples(art: &mut Artifacts, mu: &DyadicMeasure, cfg: &RunConfig, default_count: usize) -> Result<()> {
    let pts = sample_points(cfg.seed, cfg.points.unwrap_or(default_count), 8.0)?;
    let opts = AtomizeOptions::default();
    let rows = pts.par_iter().map(|z| singular_inner(mu, z, &opts)).collect::<Result<Vec<_>>>()?;
    let mut csv = String::from("re_z,im_z,re_s,im_s,err_s,re_ds,im_ds,err_ds\n");
    for (z, (s, ds)) in pts.iter().zip(rows) {
        let z = z.value();
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            fmt_f64(z.re),
            fmt_f64(z.im),
            fmt_f64(s.value.re),
            fmt_f64(s.value.im),
            fmt_f64(s.error_bound),
            fmt_f64(ds.value.re),
            fmt_f64(ds.value.im),
            fmt_f64(ds.error_bound)
        ));
    }
    art.text("samples.csv", &csv)
}

fn nomoc(cfg: &RunConfig, art: &mut Artifacts) -> Result<(Value, Vec<Item>)> {
    let name = cfg.majorant.clone().unwrap_or_else(|| "power:1/2".into());
    let w = Majorant::parse(&name).map_err(|e| usage("majorant", e))?;
    let levels = cfg.levels.unwrap_or(3);
    let (mu, rule) = build_nomoc(&w, levels)?;
    let top = rule.generation_level(levels).unwrap_or(0);
    let depth = cfg.depth.unwrap_or(top.min(16));
    let quad = quad(cfg);
    art.json("measure.json", &measure_dump(&mu, depth)?)?;

    let moc = verify_moc_bound(&mu, &w, depth)?;
    art.json(
        "moc_bound.json",
        &json!({
            "passed": moc.passed(),
            "depth": moc.depth,
            "direct": moc.direct,
            "third_all_levels": moc.third_all_levels,
            "regime_start": moc.regime_start,
            "third_regime": moc.third_regime,
            "triple_regime": moc.triple_regime,
            "worst_ratio": json_f64(moc.worst_ratio),
            "worst_arc": arc_json(moc.worst_arc),
            "worst_regime_ratio": json_f64(moc.worst_regime_ratio),
        }),
    )?;
    let hull = support_hull(&mu, depth)?;
    let w1 = w1_report(&mu, &hull, depth, &quad)?;
    art.w1(&w1)?;
    singular_samples(art, &mu, cfg, 16)?;
    let params = json!({
        "majorant": w.to_string(),
        "levels": levels,
        "generations": &rule.generations()[..=levels as usize],
        "depth": depth,
        "quad": quad.nodes,
        "points": cfg.points.unwrap_or(16),
        "seed": cfg.seed,
    });
    Ok((params, vec![Item { name: "moc_bound", passed: moc.passed() }, Item { name: "w1_converging", passed: w1_passes(&w1.report) }]))
}

fn load_set(path: &Path) -> Result<DyadicClosedSet> {
    DyadicClosedSet::from_json(&read_json(path)?).map_err(|e| usage("set", e))
}

fn nosupp(cfg: &RunConfig, art: &mut Artifacts) -> Result<(Value, Vec<Item>)> {
    let depth = cfg.depth.unwrap_or(12);
    let set = match &cfg.set {
        Some(p) => load_set(p)?,
        None => DyadicClosedSet::from_points(vec![int(0), ratio(1, 3)], depth)?,
    };
    let quad = quad(cfg);
    let c = build_nosupp(&set, depth)?;
    art.json("set.json", &c.set.to_json())?;
    art.json("measure.json", &measure_dump(&c.measure, depth)?)?;
    let arcs = |g: &Vec<Vec<crate::dyadic::DyadicArc>>| -> Value {
        g.iter().map(|gen| gen.iter().map(|&a| arc_json(a)).collect::<Vec<_>>()).collect::<Vec<_>>().into()
    };
    art.json(
        "coverings.json",
        &json!({
            "generations": arcs(&c.coverings.generations),
            "tilde": arcs(&c.coverings.tilde),
            "truncated": c.coverings.truncated,
        }),
    )?;
    let r = c.check()?;
    art.json(
        "nosupp_check.json",
        &json!({
            "passed": r.passed(),
            "dense_on_set": r.dense_on_set,
            "null_off_set": r.null_off_set,
            "covering_density": r.covering_density,
            "packing": r.packing,
            "min_density_margin": json_f64(r.min_density_margin),
        }),
    )?;
    art.tail("carleson", &carleson_sum(&c.set, depth)?, json!({}))?;
    let w1 = w1_report(&c.measure, &c.set, depth, &quad)?;
    art.w1(&w1)?;
    singular_samples(art, &c.measure, cfg, 16)?;
    let params = json!({
        "set": cfg.set.as_ref().map(|p| p.display().to_string()),
        "depth": depth,
        "quad": quad.nodes,
        "points": cfg.points.unwrap_or(16),
        "seed": cfg.seed,
    });
    let items = vec![
        Item { name: "dense_on_set", passed: r.dense_on_set },
        Item { name: "null_off_set", passed: r.null_off_set },
        Item { name: "covering_density", passed: r.covering_density },
        Item { name: "packing", passed: r.packing },
        Item { name: "w1_converging", passed: w1_passes(&w1.report) },
    ];
    Ok((params, items))
}

fn riesz(cfg: &RunConfig, art: &mut Artifacts) -> Result<(Value, Vec<Item>)> {
    let eta = cfg.eta.clone().unwrap_or_else(|| ratio(1, 2));
    let depth = cfg.depth.unwrap_or(8);
    let extra = cfg.levels.unwrap_or(12);
    let (nu, rule) = build_riesz(eta.clone()).map_err(|e| usage("eta", e))?;
    let delta = ratio(RIESZ_DELTA.0, RIESZ_DELTA.1);
    art.json("measure.json", &measure_dump(&nu, depth)?)?;

    let wr = witness_search(&rule, &delta, depth, extra)?;
    art.json(
        "witness.json",
        &json!({
            "delta": to_json_pair(&delta),
            "max_level": wr.max_level,
            "max_extra": wr.max_extra,
            "arcs_checked": wr.arcs_checked,
            "missing_count": wr.missing.len(),
            "missing_first": wr.missing.iter().take(16).map(|&a| arc_json(a)).collect::<Vec<_>>(),
            "deepest_needed": wr.deepest_needed,
        }),
    )?;

    let n_max = depth + 2;
    let z = zygmund_seminorm(&nu, n_max)?;
    let e = exp_zygmund_constant(&nu, n_max)?;
    let cy = cyclicity_constant(&nu, n_max)?;
    let mut csv = String::from("level,seminorm,seminorm_f64,ln_exp_zygmund,ln_cyclicity\n");
    for n in 0..=n_max as usize {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            n,
            z.per_level[n],
            fmt_f64(to_f64(&z.per_level[n])),
            fmt_f64(e.per_level_ln[n]),
            fmt_f64(cy.per_level_ln[n])
        ));
    }
    art.text("zygmund.csv", &csv)?;
    let worst_of = |w: &[Option<_>], ln: &[f64]| -> Value {
        let best = ln.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).map(|(i, _)| i);
        pair_json(best.and_then(|i| w[i]))
    };
    art.json(
        "zygmund.json",
        &json!({
            "seminorm_sup": to_json_pair(&z.sup()),
            "exp_zygmund": {
                "verdict": e.trend.as_str(),
                "ln_constant": json_f64(e.ln_constant()),
                "worst_pair": worst_of(&e.worst, &e.per_level_ln),
            },
            "cyclicity": {
                "verdict": cy.trend.as_str(),
                "ln_constant": json_f64(cy.ln_constant()),
                "worst_pair": worst_of(&cy.worst, &cy.per_level_ln),
            },
        }),
    )?;
    let params = json!({ "eta": to_json_pair(&eta), "depth": depth, "levels": extra });
    let items = vec![
        Item { name: "witness_exists", passed: wr.deepest_needed.is_some() },
        Item { name: "witness_within_extra_levels", passed: wr.passed() },
    ];
    Ok((params, items))
}

fn clark(cfg: &RunConfig, art: &mut Artifacts) -> Result<(Value, Vec<Item>)> {
    let eta = cfg.eta.clone().unwrap_or_else(|| ratio(1, 2));
    let radial = cfg.depth.unwrap_or(16);
    let angular = cfg.points.unwrap_or(4096);
    if radial == 0 || radial > 30 || angular == 0 {
        return Err(BlochError::InvalidArgument("depth/points: the grid needs 1..=30 radial layers and some angles".into()));
    }
    let (nu, _) = build_riesz(eta.clone()).map_err(|e| usage("eta", e))?;
    let f = clark_function(&nu, AtomizeOptions::coarse(1e-6));
    let mut grid = Vec::with_capacity(radial as usize * angular);
    for j in 1..=radial {
        for k in 0..angular {
            grid.push(DiscPoint::polar(1.0 - (-(j as f64)).exp2(), k as f64 / angular as f64)?);
        }
    }
    let windows_log2 = 6;
    let scan = growth_scan(&f.f_fn(), GROWTH_DELTA, &grid, windows_log2)?;
    let mut per_layer = vec![0usize; radial as usize];
    for z in &scan.captured {
        let j = (-z.boundary_gap().log2()).round() as usize;
        per_layer[j.clamp(1, radial as usize) - 1] += 1;
    }
    let mut csv = String::from("layer,gap,captured,of\n");
    for (j, c) in per_layer.iter().enumerate() {
        csv.push_str(&format!("{},{},{},{}\n", j + 1, fmt_f64((-((j + 1) as f64)).exp2()), c, angular));
    }
    art.text("growth.csv", &csv)?;
    let probe: Vec<DiscPoint64> = sample_points(cfg.seed, 64, 8.0)?;
    let bloch = bloch_seminorm_sample(&f.f_fn(), &probe)?;
    let max_dist = scan.max_window_distance();
    let limit = 1.0 / 32.0;
    art.json(
        "growth.json",
        &json!({
            "delta": json_f64(GROWTH_DELTA),
            "grid_points": grid.len(),
            "captured": scan.captured.len(),
            "windows": 1u32 << windows_log2,
            "max_window_distance": json_f64(max_dist),
            "distance_limit": json_f64(limit),
            "window_distances": scan.window_distances.iter().map(|d| json_f64(*d)).collect::<Vec<_>>(),
            "bloch_lower_bound": json_f64(bloch.value),
            "bloch_argmax": bloch.argmax.map(|z: Complex<f64>| json!([json_f64(z.re), json_f64(z.im)])),
        }),
    )?;
    let params = json!({ "eta": to_json_pair(&eta), "depth": radial, "points": angular, "seed": cfg.seed });
    Ok((params, vec![Item { name: "growth_accumulates", passed: max_dist <= limit }]))
}

fn atom(cfg: &RunConfig, art: &mut Artifacts) -> Result<(Value, Vec<Item>)> {
    let count = cfg.points.unwrap_or(50);
    let depth = cfg.depth.unwrap_or(14);
    let quad = quad(cfg);
    let mu = point_mass(int(0), int(1));
    let pts = sample_points(cfg.seed, count, 10.0)?;
    let opts = AtomizeOptions::default();
    let rows = pts
        .par_iter()
        .map(|z| {
            let h = transform(&mu, z, Kernel::Herglotz, &opts)?;
            let hp = transform(&mu, z, Kernel::HerglotzPrime, &opts)?;
            let (s, _) = singular_inner(&mu, z, &opts)?;
            Ok((h, hp, s))
        })
        .collect::<Result<Vec<_>>>()?;
    let one = Complex::new(1.0, 0.0);
    let mut csv = String::from("re_z,im_z,abs_err_h,bound_h,rel_err_dh,bound_dh,rel_err_s,bound_s\n");
    let (mut max_h, mut max_bound_h, mut max_dh, mut max_s) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut within = true;
    for (z, (h, hp, s)) in pts.iter().zip(rows) {
        let z = z.value();
        let h0 = (one + z) / (one - z);
        let dh0 = 2.0 / ((one - z) * (one - z));
        let s0 = (-h0).exp();
        let eh = (h.value - h0).norm();
        let edh = (hp.value - dh0).norm() / dh0.norm();
        let es = (s.value - s0).norm() / s0.norm();
        within &= eh <= h.error_bound;
        max_h = max_h.max(eh / h0.norm());
        max_bound_h = max_bound_h.max(h.error_bound);
        max_dh = max_dh.max(edh);
        max_s = max_s.max(es);
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            fmt_f64(z.re),
            fmt_f64(z.im),
            fmt_f64(eh),
            fmt_f64(h.error_bound),
            fmt_f64(edh),
            fmt_f64(hp.error_bound),
            fmt_f64(es),
            fmt_f64(s.error_bound)
        ));
    }
    art.text("comparison.csv", &csv)?;
    art.json(
        "comparison.json",
        &json!({
            "points": count,
            "max_rel_error_h": json_f64(max_h),
            "max_bound_h": json_f64(max_bound_h),
            "max_rel_error_dh": json_f64(max_dh),
            "max_rel_error_s": json_f64(max_s),
            "h_within_bound": within,
        }),
    )?;
    let set = DyadicClosedSet::from_points(vec![int(0)], depth)?;
    let w1 = w1_report(&mu, &set, depth, &quad)?;
    art.w1(&w1)?;
    let params = json!({ "depth": depth, "quad": quad.nodes, "points": count, "seed": cfg.seed });
    let items = vec![
        Item { name: "herglotz_within_bound", passed: within && max_bound_h <= 1e-8 },
        Item { name: "singular_relative_error", passed: max_s <= 1e-8 },
        Item { name: "w1_converging", passed: w1_passes(&w1.report) },
    ];
    Ok((params, items))
}
