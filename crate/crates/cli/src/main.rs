mod args;
mod report;

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use serde::Serialize;
use serde_json::json;
use varifold_core::boundary::{
    admissibility_check, circle_conormal_integral_quad, datum_integral, sup_conormal_integral, BoundaryDatum,
    SupSearch, Threshold,
};
use varifold_core::curvature::{euler_characteristic, helfrich_energy, willmore_energy};
use varifold_core::density::{density, li_yau_check, spherical_link, LinkOptions};
use varifold_core::generators::{self as gens, Analytic, GeneratorOutput};
use varifold_core::mesh::MeshJson;
use varifold_core::nets::{catalogue, match_length, relax_with, Comparison, GeodesicNet, NetError, RelaxOptions, StatedBound};
use varifold_core::{DiscreteVarifold, Point};

use args::{AnalyzeArgs, BoundaryCommand, Cli, Command, Generator, NetCommand, Profile, ThresholdArg};
use report::{AnalysisReport, Check};

/// Failure modes mapped onto the exit-code contract.
enum Failure {
    /// A requested check did not pass (exit 1).
    Check(String),
    /// Bad arguments or unreadable input (exit 2).
    Input(String),
}

type CmdResult = Result<(), Failure>;

fn input<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Input(e.to_string())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    if let Err(e) = configure_threads(cli.serial) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn configure_threads(serial: bool) -> Result<(), String> {
    let threads = if serial {
        Some(1)
    } else {
        match std::env::var("VARIFOLD_LAB_THREADS") {
            Ok(s) => Some(
                s.trim()
                    .parse::<usize>()
                    .ok()
                    .filter(|&n| n > 0)
                    .ok_or_else(|| format!("VARIFOLD_LAB_THREADS must be a positive integer, got {s:?}"))?,
            ),
            Err(_) => None,
        }
    };
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Generate { generator } => generate(generator),
        Command::Analyze(a) => analyze(&a, cli.tolerance_profile),
        Command::Report { mesh, out } => {
            let a = AnalyzeArgs {
                mesh,
                energy: true,
                density: Vec::new(),
                link: Vec::new(),
                topology: true,
                liyau: true,
                helfrich: Vec::new(),
                out,
            };
            analyze_with(&a, cli.tolerance_profile, true)
        }
        Command::Net { command } => net(command),
        Command::Boundary { command } => boundary(command),
    }
}

fn write_json(value: &impl Serialize, out: Option<&Path>) -> CmdResult {
    let mut text = serde_json::to_string_pretty(value).map_err(input)?;
    text.push('\n');
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Input(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn parse_floats(s: &str, n: usize) -> Result<Vec<f64>, Failure> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure::Input(format!("malformed coordinates {s:?}")))?;
    if parts.len() != n || parts.iter().any(|x| !x.is_finite()) {
        return Err(Failure::Input(format!("expected {n} finite comma-separated numbers, got {s:?}")));
    }
    Ok(parts)
}

fn parse_point(s: &str) -> Result<Point, Failure> {
    let c = parse_floats(s, 3)?;
    Ok(Point::new(c[0], c[1], c[2]))
}

/// "x,y,z:r"
fn parse_link(s: &str) -> Result<(Point, f64), Failure> {
    let (p, r) = s
        .split_once(':')
        .ok_or_else(|| Failure::Input(format!("link spec {s:?} must be x,y,z:r")))?;
    let r: f64 = r
        .trim()
        .parse()
        .ok()
        .filter(|r: &f64| r.is_finite() && *r > 0.0)
        .ok_or_else(|| Failure::Input(format!("link radius in {s:?} must be positive")))?;
    Ok((parse_point(p)?, r))
}

/// "x,y:r"
fn parse_disk(s: &str) -> Result<([f64; 2], f64), Failure> {
    let (c, r) = s
        .split_once(':')
        .ok_or_else(|| Failure::Input(format!("disk spec {s:?} must be x,y:r")))?;
    let c = parse_floats(c, 2)?;
    let r: f64 = r
        .trim()
        .parse()
        .map_err(|_| Failure::Input(format!("malformed disk radius in {s:?}")))?;
    Ok(([c[0], c[1]], r))
}

#[derive(Serialize)]
struct GeneratedFile {
    generator: String,
    #[serde(flatten)]
    mesh: MeshJson,
    analytic: Analytic,
}

fn generate(g: Generator) -> CmdResult {
    let (name, out, result) = match g {
        Generator::Sphere { radius, level, out } => ("sphere", out, gens::gen_sphere(radius, level.level)),
        Generator::Cap { radius, theta, level, out } => ("cap", out, gens::gen_cap(radius, theta, level.level)),
        Generator::DoubleBubble { theta2, rho, level, out } => {
            ("double-bubble", out, gens::gen_double_bubble(theta2, rho, level.level))
        }
        Generator::DoubleBubbleFlat { rho, level, out } => {
            ("double-bubble-flat", out, gens::gen_double_bubble_flat(rho, level.level))
        }
        Generator::TripleBubble { level, out } => ("triple-bubble", out, gens::gen_triple_bubble(level)),
        Generator::BranchedPatch { delta, rho0, level, out } => {
            ("branched-patch", out, gens::gen_branched_patch(delta, rho0, level.level))
        }
        Generator::SingularPair { disks, delta, level, out } => {
            let parsed = disks.iter().map(|d| parse_disk(d)).collect::<Result<Vec<_>, _>>()?;
            let centers: Vec<[f64; 2]> = parsed.iter().map(|d| d.0).collect();
            let radii: Vec<f64> = parsed.iter().map(|d| d.1).collect();
            ("singular-pair", out, gens::gen_singular_pair(&centers, &radii, delta, level.level))
        }
        Generator::FlatDisk { rho, level, out } => ("flat-disk", out, gens::gen_flat_disk(rho, level.level)),
        Generator::Torus { major, minor, level, out } => ("torus", out, gens::gen_torus(major, minor, level.level)),
        Generator::Cylinder { radius, height, level, out } => {
            ("cylinder", out, gens::gen_cylinder(radius, height, level.level))
        }
    };
    let GeneratorOutput { varifold, analytic, .. } = result.map_err(input)?;
    log::info!("{name}: {} vertices, {} faces", varifold.vertex_count(), varifold.face_count());
    let file = GeneratedFile {
        generator: name.into(),
        mesh: varifold.to_json(),
        analytic,
    };
    write_json(&file, Some(&out))
}

fn load_mesh(path: &Path) -> Result<(Vec<u8>, DiscreteVarifold, Option<Analytic>), Failure> {
    let bytes = read(path)?;
    let text = String::from_utf8(bytes.clone()).map_err(input)?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("obj")) {
        let v = DiscreteVarifold::from_obj_str(&text).map_err(input)?;
        return Ok((bytes, v, None));
    }
    let value: serde_json::Value = serde_json::from_str(&text).map_err(input)?;
    let analytic = match value.get("analytic") {
        Some(a) => Some(serde_json::from_value::<Analytic>(a.clone()).map_err(input)?),
        None => None,
    };
    let mesh: MeshJson = serde_json::from_value(value).map_err(input)?;
    let v = DiscreteVarifold::from_json(mesh).map_err(input)?;
    Ok((bytes, v, analytic))
}

/// Exact density attached to `p`, when the analytic block lists one there.
fn expected_density(analytic: Option<&Analytic>, p: &Point, scale: f64) -> Option<f64> {
    analytic?
        .density_points
        .iter()
        .find(|d| (Point::new(d.point[0], d.point[1], d.point[2]) - p).norm() <= 1e-6 * scale.max(1.0))
        .map(|d| d.density)
}

fn analyze(a: &AnalyzeArgs, profile: Profile) -> CmdResult {
    analyze_with(a, profile, false)
}

fn analyze_with(a: &AnalyzeArgs, profile: Profile, all_points: bool) -> CmdResult {
    let (bytes, v, analytic) = load_mesh(&a.mesh)?;
    let mut densities: Vec<Point> = a.density.iter().map(|s| parse_point(s)).collect::<Result<_, _>>()?;
    let mut links: Vec<(Point, f64)> = a.link.iter().map(|s| parse_link(s)).collect::<Result<_, _>>()?;
    let (lo, hi) = v
        .bounding_box()
        .ok_or_else(|| Failure::Input("mesh has no vertices".into()))?;
    let diameter = (hi - lo).norm();
    if all_points {
        if let Some(an) = &analytic {
            for d in &an.density_points {
                let p = Point::new(d.point[0], d.point[1], d.point[2]);
                densities.push(p);
                links.push((p, (0.05 * diameter).max(2.0 * v.mean_edge_length())));
            }
        }
    }

    let mut report = AnalysisReport::new(a.mesh.display().to_string(), &bytes, profile);
    let tol = report.tolerances;
    report.block(
        "mesh",
        json!({
            "vertices": v.vertex_count(),
            "faces": v.face_count(),
            "total_mass": v.total_mass(),
            "mean_edge_length": v.mean_edge_length(),
        }),
    );

    if a.energy {
        let w = willmore_energy(&v);
        let exact = analytic.as_ref().and_then(|an| an.willmore);
        report.block(
            "energy",
            json!({ "willmore": w, "willmore_over_4pi": w / (4.0 * PI), "analytic": exact }),
        );
        if let Some(exact) = exact {
            report.check(Check::relative("willmore", w, exact, tol.energy));
        }
    }

    let mut density_blocks = Vec::new();
    for p in &densities {
        let d = density(&v, p).map_err(|e| Failure::Input(format!("density at {p:?}: {e}")))?;
        if let Some(exact) = expected_density(analytic.as_ref(), p, diameter) {
            report.check(Check::absolute(format!("density at {:?}", [p.x, p.y, p.z]), d.theta, exact, tol.density));
        }
        density_blocks.push(d);
    }
    if !density_blocks.is_empty() {
        report.block("density", &density_blocks);
    }

    let mut link_blocks = Vec::new();
    for (p, r) in &links {
        let link = spherical_link(&v, p, *r, &LinkOptions::default());
        let m = match_length(link.total_length);
        if let Some(exact) = expected_density(analytic.as_ref(), p, diameter) {
            report.check(Check::relative(
                format!("link length at {:?}", [p.x, p.y, p.z]),
                link.total_length,
                2.0 * PI * exact,
                tol.link,
            ));
        }
        link_blocks.push(json!({ "link": link, "match": m, "label": m.label() }));
    }
    if !link_blocks.is_empty() {
        report.block("link", &link_blocks);
    }

    if a.topology {
        match euler_characteristic(&v) {
            Ok(t) => {
                report.check(Check::absolute(
                    "gauss-bonnet",
                    t.angle_defect_characteristic,
                    t.euler_characteristic as f64,
                    tol.gauss_bonnet,
                ));
                report.block("topology", &t);
            }
            Err(e) => report.block("topology", json!({ "applicable": false, "reason": e.to_string() })),
        }
    }

    if a.liyau {
        let mut samples = densities.clone();
        if let Some(an) = &analytic {
            for d in &an.density_points {
                let p = Point::new(d.point[0], d.point[1], d.point[2]);
                if !samples.contains(&p) {
                    samples.push(p);
                }
            }
        }
        // a few spread vertices keep the check meaningful without density points
        let n = v.vertex_count();
        for k in 0..4 {
            samples.push(v.vertices()[k * n / 4]);
        }
        let r = li_yau_check(&v, &samples, tol.li_yau).map_err(input)?;
        report.check(Check::at_most("li-yau", r.theta_max, r.willmore_over_4pi, tol.li_yau));
        report.block(
            "liyau",
            json!({
                "theta_max": r.theta_max,
                "argmax": samples[r.argmax],
                "willmore": r.willmore,
                "willmore_over_4pi": r.willmore_over_4pi,
                "excess": r.excess,
                "equality_gap": r.equality_gap,
                "tolerance": r.tolerance,
                "pass": r.pass,
            }),
        );
    }

    if !a.helfrich.is_empty() {
        let mut rows = Vec::new();
        for &c0 in &a.helfrich {
            let h = helfrich_energy(&v, c0).map_err(input)?;
            rows.push(json!({ "c0": c0, "energy": h }));
        }
        report.block("helfrich", rows);
    }

    write_json(&report, a.out.as_deref())?;
    if report.pass {
        Ok(())
    } else {
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
        Err(Failure::Check(failed.join(", ")))
    }
}

fn trim_number(x: f64) -> String {
    let s = format!("{x:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

fn net(cmd: NetCommand) -> CmdResult {
    match cmd {
        NetCommand::Catalogue { json } => {
            let cat = catalogue();
            if json {
                return write_json(&cat, None);
            }
            println!("{:>3}  {:<38} {:>5}  {:>10}  {:<5}  {:>8}  {:<8}  note", "#", "net", "arcs", "length", "vs 4π", "density", "stated");
            for e in &cat {
                let length = e.length.map_or("n/a".into(), |l| format!("{l:.6}"));
                let density = e.density().map_or("n/a".into(), |d| format!("{d:.4}"));
                let cmp = match e.comparison {
                    Comparison::Below4Pi => "< 4π",
                    Comparison::Above4Pi => "> 4π",
                };
                let stated = match e.stated_bound {
                    Some(StatedBound::Below(b)) => format!("< {b}"),
                    Some(StatedBound::Above(b)) => format!("> {b}"),
                    None => String::new(),
                };
                let note = if e.formula_valid { "" } else { "formula invalid as printed" };
                println!(
                    "{:>3}  {:<38} {:>5}  {:>10}  {:<5}  {:>8}  {:<8}  {note}",
                    e.index, e.name, e.arc_count, length, cmp, density, stated
                );
            }
            Ok(())
        }
        NetCommand::Relax { net, max_iter, tol, out } => {
            let text = String::from_utf8(read(&net)?).map_err(input)?;
            let start = GeodesicNet::from_json_str(&text).map_err(Failure::Input)?;
            let r = match relax_with(&start, &RelaxOptions::new(max_iter, tol)) {
                Ok(r) => r,
                Err(e @ NetError::ArcCollapse { .. }) => return Err(Failure::Check(e.to_string())),
                Err(e) => return Err(input(e)),
            };
            write_json(
                &json!({
                    "net": r.net,
                    "method": r.method,
                    "iterations": r.iterations,
                    "converged": r.converged,
                    "residual": r.residual,
                    "length": r.length,
                    "length_history": r.lengths,
                }),
                out.as_deref(),
            )?;
            if r.converged {
                Ok(())
            } else {
                Err(Failure::Check(format!("not converged after {} iterations", r.iterations)))
            }
        }
        NetCommand::Match { link } => {
            let value: serde_json::Value = serde_json::from_slice(&read(&link)?).map_err(input)?;
            let length = value
                .get("total_length")
                .and_then(|l| l.as_f64())
                .ok_or_else(|| Failure::Input("link file needs a numeric total_length".into()))?;
            let m = match_length(length);
            println!("{}, density {}", m.label(), trim_number(length / (2.0 * PI)));
            Ok(())
        }
    }
}

fn load_datum(path: &Path) -> Result<BoundaryDatum, Failure> {
    let text = String::from_utf8(read(path)?).map_err(input)?;
    BoundaryDatum::from_json_str(&text).map_err(input)
}

fn boundary(cmd: BoundaryCommand) -> CmdResult {
    match cmd {
        BoundaryCommand::CircleIntegral { datum, point, quad } => {
            let d = load_datum(&datum)?;
            let x0 = parse_point(&point)?;
            let value = datum_integral(&d.circles, &x0).map_err(input)?;
            let quadrature = match quad {
                Some(n) => {
                    let mut total = 0.0;
                    for c in &d.circles {
                        total += circle_conormal_integral_quad(c, &x0, n).map_err(input)?;
                    }
                    Some(total)
                }
                None => None,
            };
            write_json(&json!({ "point": x0, "value": value, "quadrature": quadrature }), None)
        }
        BoundaryCommand::Sup { datum, grid } => {
            let d = load_datum(&datum)?;
            let search = SupSearch { grid, ..SupSearch::default() };
            let r = sup_conormal_integral(&d.circles, &search).map_err(input)?;
            write_json(&r, None)
        }
        BoundaryCommand::Admissible { datum, p_estimate, threshold } => {
            let d = load_datum(&datum)?;
            let t = match threshold {
                ThresholdArg::SixPi => Threshold::SixPi,
                ThresholdArg::EightPi => Threshold::EightPi,
            };
            let r = admissibility_check(p_estimate, &d.circles, t, &SupSearch::default()).map_err(input)?;
            write_json(&r, None)?;
            if r.pass {
                Ok(())
            } else {
                Err(Failure::Check(format!("P + 2 sup = {:.6} against {:.6}", r.lhs, r.threshold)))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_specs() {
        assert_eq!(parse_point("0, 1.5,-2").ok(), Some(Point::new(0.0, 1.5, -2.0)));
        assert!(parse_point("0,1").is_err());
        assert!(parse_point("a,b,c").is_err());
        assert!(parse_point("0,nan,0").is_err());
        let (p, r) = parse_link("1,0,0:0.1").ok().unwrap();
        assert_eq!((p, r), (Point::new(1.0, 0.0, 0.0), 0.1));
        assert!(parse_link("1,0,0").is_err());
        assert!(parse_link("1,0,0:-1").is_err());
        assert_eq!(parse_disk("0.1,0:0.3").ok(), Some(([0.1, 0.0], 0.3)));
    }

    #[test]
    fn numbers_are_trimmed() {
        assert_eq!(trim_number(1.0), "1");
        assert_eq!(trim_number(1.5), "1.5");
        assert_eq!(trim_number(1.8245203), "1.82452");
    }
}
