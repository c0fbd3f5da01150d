use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde_json::{json, Map, Value};

use central_field::analysis::{
    classify_by_integration, classify_orbit, collision_fixed_points, equivalence_report,
    expected_verdict, portrait as build_portrait, relative_equilibria, EquivalenceReport,
    OracleOptions, OrbitClass, OrbitTag,
};
use central_field::coords::McGeheeState;
use central_field::dynamics::{integrate, FieldKind, IntegrationOptions};
use central_field::model::{energy_profile, max_radius};
use central_field::{EnergyLevel, Flavor, PotentialSpec};

use crate::config::{parse_grid, resolve_flavor, Settings};
use crate::output::{print_json, print_text, write_atomic};
use crate::{ClassifyArgs, CliError, EquilibriaArgs, EquivalenceArgs, PortraitArgs, SimulateArgs};

fn header(seed: u64) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("schema".into(), json!(1));
    m.insert("seed".into(), json!(seed));
    m
}

fn spec_fields(m: &mut Map<String, Value>, spec: &PotentialSpec, h: EnergyLevel) {
    m.insert("alpha".into(), json!(spec.alpha()));
    m.insert("h".into(), json!(h.h()));
    m.insert("epsilon".into(), json!(spec.epsilon()));
    m.insert("flavor".into(), json!(spec.flavor().as_str()));
    m.insert("outside_analyzed_scope".into(), json!(!spec.within_analyzed_scope()));
}

pub fn equilibria(args: EquilibriaArgs) -> Result<(), CliError> {
    let cfg = Settings::load(args.common)?;
    let spec = cfg.spec()?;
    let h = cfg.energy()?;
    max_radius(&spec, h)?;
    let eqs = if spec.is_amended() {
        Vec::new()
    } else {
        relative_equilibria(&spec, h)?
    };
    let collision = collision_fixed_points(&spec, h);
    let mut doc = header(cfg.seed()?);
    spec_fields(&mut doc, &spec, h);
    doc.insert(
        "equilibria".into(),
        json!(eqs
            .iter()
            .map(|e| json!({"r": e.r, "u": e.u, "kind": e.kind, "source": e.source}))
            .collect::<Vec<_>>()),
    );
    doc.insert(
        "collision".into(),
        json!({
            "fixed_points": collision.fixed_points.iter().map(|s| [s.r, s.v, s.u]).collect::<Vec<_>>(),
            "manifold_radius": collision.manifold_radius,
        }),
    );
    print_json(&Value::Object(doc));
    Ok(())
}

fn class_json(cls: &OrbitClass) -> Value {
    json!({
        "tag": cls.tag,
        "turning_radii": cls.turning_radii,
        "tangency": cls.tangency,
    })
}

pub fn classify(args: ClassifyArgs) -> Result<(), CliError> {
    let cfg = Settings::load(args.common)?;
    let spec = cfg.spec()?;
    let h = cfg.energy()?;
    let c = cfg
        .momentum()?
        .ok_or_else(|| CliError::validation("invalid `c`: is required"))?;
    let cls = classify_orbit(&spec, h, c)?;
    let mut doc = header(cfg.seed()?);
    spec_fields(&mut doc, &spec, h);
    doc.insert("c".into(), json!(c.value()));
    doc.insert("reflected".into(), json!(c.reflected()));
    if let Value::Object(m) = class_json(&cls) {
        doc.extend(m);
    }
    let mut mismatch = None;
    if args.oracle {
        let oracle = classify_by_integration(&spec, h, c, &OracleOptions::default())?;
        if oracle.tag != cls.tag {
            mismatch = Some(format!(
                "classifier says {} but integration says {}",
                cls.tag, oracle.tag
            ));
        }
        doc.insert("oracle".into(), class_json(&oracle));
        doc.insert("agree".into(), json!(mismatch.is_none()));
    }
    print_json(&Value::Object(doc));
    match mismatch {
        Some(msg) => Err(CliError::disagreement(msg)),
        None => Ok(()),
    }
}

pub fn portrait(args: PortraitArgs) -> Result<(), CliError> {
    let cfg = Settings::load(args.common)?;
    let spec = cfg.spec()?;
    let h = cfg.energy()?;
    let grid_text = cfg
        .string("c_grid", args.c_grid.as_deref())?
        .ok_or_else(|| CliError::validation("invalid `c-grid`: is required"))?;
    let cs = parse_grid(&grid_text)?;
    let points = cfg.int("points", args.points)?.unwrap_or(512) as usize;
    if points < 2 {
        return Err(CliError::validation("invalid `points`: need at least 2"));
    }
    let p = build_portrait(&spec, h, &cs, points)?;
    let dir = cfg.out_dir()?;
    let mut files = Vec::new();
    for curve in &p.curves {
        let name = format!("{}.csv", curve.name());
        write_atomic(&dir, &name, &curve.to_csv())?;
        files.push(name);
    }
    write_atomic(&dir, "combined.csv", &p.combined_csv())?;
    files.push("combined.csv".into());
    let mut doc = header(cfg.seed()?);
    spec_fields(&mut doc, &spec, h);
    doc.insert("c_grid".into(), json!(cs));
    doc.insert("files".into(), json!(files));
    print_json(&Value::Object(doc));
    Ok(())
}

const SWEEP_ALPHAS: [f64; 6] = [0.5, 1.0, 1.5, 2.0, 2.5, 3.0];
const SWEEP_EPSILONS: [f64; 3] = [0.01, 0.05, 0.1];

struct Pair {
    a: PotentialSpec,
    b: PotentialSpec,
}

fn report_json(rep: &EquivalenceReport) -> Value {
    let mut v = rep.to_json();
    let expected = if rep.spec_a.flavor() == Flavor::NonSmoothed {
        expected_verdict(rep.spec_a.alpha(), rep.spec_b.flavor())
    } else {
        None
    };
    v["expected"] = json!(expected.map(|e| format!("{e:?}")));
    v
}

fn mismatches(rep: &EquivalenceReport) -> Option<String> {
    if rep.spec_a.flavor() != Flavor::NonSmoothed {
        return None;
    }
    let expected = expected_verdict(rep.spec_a.alpha(), rep.spec_b.flavor())?;
    (expected != rep.verdict).then(|| {
        format!(
            "alpha = {}, epsilon = {}, {} vs {}: got {:?}, expected {:?}",
            rep.spec_a.alpha(),
            rep.spec_b.epsilon(),
            rep.spec_a.flavor(),
            rep.spec_b.flavor(),
            rep.verdict,
            expected
        )
    })
}

pub fn equivalence(args: EquivalenceArgs) -> Result<(), CliError> {
    let cfg = Settings::load(args.common.clone())?;
    let h = cfg.energy()?;
    let n = cfg.int("samples", args.samples)?.unwrap_or(64) as usize;
    if n == 0 {
        return Err(CliError::validation("invalid `samples`: need at least 1"));
    }
    let seed = cfg.seed()?;
    let flavor_a_name = cfg.string("flavor_a", args.flavor_a.as_deref())?;
    let flavor_b_name = cfg.string("flavor_b", args.flavor_b.as_deref())?;

    let pairs: Vec<Pair> = if args.sweep {
        let mut out = Vec::new();
        for &alpha in &SWEEP_ALPHAS {
            for &eps in &SWEEP_EPSILONS {
                let bare = PotentialSpec::non_smoothed(alpha)?;
                out.push(Pair {
                    a: bare,
                    b: PotentialSpec::plain(alpha, eps)?,
                });
                if alpha >= 2.0 {
                    out.push(Pair {
                        a: bare,
                        b: PotentialSpec::amended(alpha, eps)?,
                    });
                }
            }
        }
        out
    } else {
        let alpha = cfg.alpha()?;
        let eps = cfg.epsilon()?;
        let flavor_a = resolve_flavor(flavor_a_name.as_deref().or(Some("none")), 0.0)?;
        let eps_a = cfg.f64("epsilon_a", None)?.unwrap_or(if flavor_a == Flavor::NonSmoothed {
            0.0
        } else {
            eps
        });
        let flavor_b = resolve_flavor(flavor_b_name.as_deref().or(Some("plain")), eps)?;
        vec![Pair {
            a: PotentialSpec::new(alpha, eps_a, flavor_a)?,
            b: PotentialSpec::new(alpha, eps, flavor_b)?,
        }]
    };

    let run = |p: &Pair| equivalence_report(&p.a, &p.b, h, n);
    let reports: Vec<_> = match cfg.jobs()? {
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| CliError::validation(format!("invalid `jobs`: {e}")))?
            .install(|| pairs.par_iter().map(run).collect()),
        None => pairs.par_iter().map(run).collect(),
    };
    let reports = reports.into_iter().collect::<Result<Vec<_>, _>>()?;
    let failures: Vec<String> = reports.iter().filter_map(mismatches).collect();

    if args.sweep && args.table {
        let mut table = format!(
            "{:<6} {:<8} {:<16} {:<14} {:<14} {}\n",
            "alpha", "epsilon", "pair", "verdict", "expected", "witnesses"
        );
        for rep in &reports {
            let j = report_json(rep);
            let _ = writeln!(
                table,
                "{:<6} {:<8} {:<16} {:<14} {:<14} {}",
                rep.spec_a.alpha(),
                rep.spec_b.epsilon(),
                format!("{}/{}", rep.spec_a.flavor(), rep.spec_b.flavor()),
                format!("{:?}", rep.verdict),
                j["expected"].as_str().unwrap_or("-"),
                rep.witnesses.len()
            );
        }
        print_text(&table);
    } else {
        let mut doc = header(seed);
        if args.sweep {
            doc.insert("h".into(), json!(h.h()));
            doc.insert("n_samples".into(), json!(n));
            doc.insert(
                "sweep".into(),
                json!(reports.iter().map(report_json).collect::<Vec<_>>()),
            );
        } else {
            if let Value::Object(m) = report_json(&reports[0]) {
                doc.extend(m);
            }
        }
        doc.insert("matches_expected".into(), json!(failures.is_empty()));
        print_json(&Value::Object(doc));
    }

    if args.assert_paper && !failures.is_empty() {
        return Err(CliError::disagreement(format!(
            "{} verdict(s) differ from the expected table: {}",
            failures.len(),
            failures.join("; ")
        )));
    }
    Ok(())
}

fn start_state(
    cfg: &Settings,
    args: &SimulateArgs,
    spec: &PotentialSpec,
    h: EnergyLevel,
) -> Result<McGeheeState, CliError> {
    match cfg.string("from", args.from.as_deref())?.as_deref() {
        Some("equilibrium") => {
            let eqs = relative_equilibria(spec, h)?;
            let eq = eqs
                .first()
                .ok_or_else(|| CliError::validation("invalid `from`: no relative equilibrium exists"))?;
            Ok(eq.state().into())
        }
        Some("turning") => {
            let c = cfg
                .momentum()?
                .ok_or_else(|| CliError::validation("invalid `c`: required with --from turning"))?;
            let cls = classify_orbit(spec, h, c)?;
            if cls.tag == OrbitTag::Void {
                return Err(CliError::validation("invalid `c`: no orbit exists (Void)"));
            }
            let r = *cls.turning_radii.last().expect("non-Void classes carry turning radii");
            // At a turning point v = 0, so u is fixed by the energy surface; it
            // matches u_c(r) up to root accuracy.
            let u = energy_profile(r, spec, h).max(0.0).sqrt();
            Ok(McGeheeState {
                r,
                v: 0.0,
                theta: 0.0,
                u: if c.reflected() { -u } else { u },
            })
        }
        Some(other) => Err(CliError::validation(format!(
            "invalid `from`: expected equilibrium or turning, got `{other}`"
        ))),
        None => {
            let r = cfg.require_f64("r0", args.r0)?;
            let v = cfg.require_f64("v0", args.v0)?;
            let u = cfg.require_f64("u0", args.u0)?;
            Ok(McGeheeState { r, v, theta: 0.0, u })
        }
    }
}

pub fn simulate(args: SimulateArgs) -> Result<(), CliError> {
    let cfg = Settings::load(args.common.clone())?;
    let spec = cfg.spec()?;
    let h = cfg.energy()?;
    let tau = cfg.f64("tau", args.tau)?.unwrap_or(50.0);
    if !tau.is_finite() {
        return Err(CliError::validation("invalid `tau`: must be finite"));
    }
    let field = match cfg.string("field", args.field.as_deref())?.as_deref() {
        None | Some("full") => FieldKind::Full,
        Some("reduced") => FieldKind::Reduced,
        Some(other) => {
            return Err(CliError::validation(format!(
                "invalid `field`: expected full or reduced, got `{other}`"
            )))
        }
    };
    let mut s0 = start_state(&cfg, &args, &spec, h)?;
    if args.project {
        let f = energy_profile(s0.r, &spec, h);
        let norm2 = s0.u * s0.u + s0.v * s0.v;
        if f < 0.0 || norm2 == 0.0 && f > 0.0 {
            return Err(CliError::validation("invalid `r0`: cannot project onto the energy surface"));
        }
        if norm2 > 0.0 {
            let scale = (f / norm2).sqrt();
            s0.u *= scale;
            s0.v *= scale;
        }
    }
    let traj = integrate(&spec, h, field, s0, (0.0, tau), &IntegrationOptions::default())?;
    let dir = cfg.out_dir()?;
    write_atomic(&dir, "trajectory.csv", &traj.to_csv())?;
    let events = serde_json::to_string_pretty(&traj.events_json()).expect("JSON values always serialize");
    write_atomic(&dir, "events.json", &(events + "\n"))?;

    let mut counts = BTreeMap::new();
    for e in traj.events() {
        *counts.entry(format!("{:?}", e.kind)).or_insert(0usize) += 1;
    }
    let drift = traj.drift();
    let mut doc = header(cfg.seed()?);
    spec_fields(&mut doc, &spec, h);
    doc.insert("start".into(), json!([s0.r, s0.v, s0.theta, s0.u]));
    doc.insert("tau_end".into(), json!(traj.last().tau));
    doc.insert("samples".into(), json!(traj.samples().len()));
    doc.insert("events".into(), json!(counts));
    doc.insert("drift".into(), json!(drift));
    doc.insert("files".into(), json!(["trajectory.csv", "events.json"]));
    print_json(&Value::Object(doc));
    Ok(())
}
