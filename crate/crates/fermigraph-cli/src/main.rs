use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use fermigraph::atlas::{self, AtlasOptions, GridAxis, PotentialGridSpec, Projector};
use fermigraph::convex::project_hypersimplex;
use fermigraph::functionals::{
    self, lieb_f, minimize_energy_via_functional, pure_f, triangle_f_analytic, DensityFunctional, LiebFunctional,
    LiebOptions, LiebStatus, MinimizeOptions, PureFunctional, PureOptions, System, TriangleFunctional,
};
use fermigraph::linalg::Matrix;
use fermigraph::operators::{InternalHamiltonian, OneBodyHamiltonian, Potential, TwoBodyInteraction};
use fermigraph::repr::{certify_with, CertifyOptions, TScan};
use fermigraph::spectra::{density_of, eigendecompose, GroundManifold, DEGENERACY_TOL};
use fermigraph::{build_basis, Error, Graph};

const EXIT_INPUT: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(name = "fermigraph", version, about = "Spinless fermions on graphs: spectra, densities, uv checks and density functionals")]
struct Cli {
    /// Worker threads for sweeps and restarts.
    #[arg(long, global = true, env = "FERMIGRAPH_JOBS")]
    jobs: Option<usize>,
    /// Seed for randomised optimisers.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct SystemArgs {
    /// Built-in name (triangle, square, cuboctahedron, chain-M, cycle-M, complete-M) or a graph file.
    #[arg(long)]
    graph: String,
    /// Particle number.
    #[arg(long)]
    n: usize,
    /// JSON file holding the symmetric M×M interaction matrix w.
    #[arg(long)]
    interaction: Option<PathBuf>,
}

#[derive(Args, Clone, Default)]
struct PotentialArgs {
    /// Comma-separated values, or @file with a JSON array.
    #[arg(long, allow_hyphen_values = true)]
    potential: Option<String>,
    /// Square-graph potential s(1,−1,−1,1) + t(1,1,−1,−1), given as "s,t".
    #[arg(long, allow_hyphen_values = true, conflicts_with = "potential")]
    st: Option<String>,
}

#[derive(Args, Clone)]
struct DensityArg {
    /// Target density: comma-separated values or @file with a JSON array.
    #[arg(long)]
    rho: String,
    /// Project the target onto the hypersimplex first (for rounded input).
    #[arg(long)]
    project: bool,
}

#[derive(Args, Clone)]
struct Output {
    /// Write the result here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FunctionalKind {
    Triangle,
    Lieb,
    Pure,
}

#[derive(Clone, Copy, ValueEnum)]
enum Projection {
    Identity,
    Triangle,
    Octahedron,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues of H_0 + V.
    Spectrum {
        #[command(flatten)]
        sys: SystemArgs,
        #[command(flatten)]
        pot: PotentialArgs,
        /// Also dump the many-body matrix as CSV.
        #[arg(long)]
        matrix_csv: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Ground-state density as CSV.
    Density {
        #[command(flatten)]
        sys: SystemArgs,
        #[command(flatten)]
        pot: PotentialArgs,
        #[command(flatten)]
        out: Output,
    },
    /// Unique v-representability certificate for a ground state.
    Uvcheck {
        #[command(flatten)]
        sys: SystemArgs,
        #[command(flatten)]
        pot: PotentialArgs,
        /// Which ground state to certify when the ground level is degenerate.
        #[arg(long, default_value_t = 0)]
        state: usize,
        #[arg(long, default_value_t = 1e-3)]
        t_min: f64,
        #[arg(long, default_value_t = 1e3)]
        t_max: f64,
        #[arg(long, default_value_t = 64)]
        t_count: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Ensemble functional F(ρ).
    Lieb {
        #[command(flatten)]
        sys: SystemArgs,
        #[command(flatten)]
        rho: DensityArg,
        #[arg(long, default_value_t = 10_000)]
        max_iter: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Pure-state functional F̃(ρ).
    Pure {
        #[command(flatten)]
        sys: SystemArgs,
        #[command(flatten)]
        rho: DensityArg,
        #[arg(long, default_value_t = 32)]
        restarts: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Closed-form F̃ for two particles on the triangle.
    TriangleF {
        #[command(flatten)]
        rho: DensityArg,
        #[command(flatten)]
        out: Output,
    },
    /// Ground-state energy from min_ρ F(ρ) + v·ρ.
    Minimize {
        #[command(flatten)]
        sys: SystemArgs,
        #[command(flatten)]
        pot: PotentialArgs,
        #[arg(long, value_enum, default_value_t = FunctionalKind::Lieb)]
        functional: FunctionalKind,
        #[command(flatten)]
        out: Output,
    },
    /// Potential producing a target density (maximiser of the Lieb functional).
    Invert {
        #[command(flatten)]
        sys: SystemArgs,
        #[command(flatten)]
        rho: DensityArg,
        #[command(flatten)]
        out: Output,
    },
    /// Sweep over a potential grid.
    Atlas {
        #[command(flatten)]
        sys: SystemArgs,
        /// Use the square (s,t) plane over [−range, range].
        #[arg(long)]
        square_st: bool,
        #[arg(long, default_value_t = 2.0)]
        range: f64,
        #[arg(long, default_value_t = 81)]
        steps: usize,
        /// Axis "name:u1,…,uM:lo:hi:steps"; repeatable.
        #[arg(long, allow_hyphen_values = true)]
        axis: Vec<String>,
        /// Base potential added to every cell.
        #[arg(long, allow_hyphen_values = true)]
        base: Option<String>,
        /// Skip uv certification.
        #[arg(long)]
        no_classify: bool,
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long, value_enum)]
        projection: Option<Projection>,
        /// CSV of projected densities.
        #[arg(long, requires = "projection")]
        image: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// F and F̃ on an interior density lattice with spacing 1/k.
    Surface {
        #[command(flatten)]
        sys: SystemArgs,
        #[arg(long, default_value_t = 6)]
        k: usize,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
        #[command(flatten)]
        out: Output,
    },
}

enum Failure {
    Input(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numerical_failure() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type Run = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(j) = cli.jobs {
        if j == 0 {
            eprintln!("error: --jobs must be positive");
            return ExitCode::from(EXIT_INPUT);
        }
        rayon::ThreadPoolBuilder::new().num_threads(j).build_global().ok();
    }
    match run(cli.command, cli.seed) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INPUT)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_NUMERICAL)
        }
    }
}

fn run(cmd: Command, seed: u64) -> Run {
    match cmd {
        Command::Spectrum { sys, pot, matrix_csv, out } => cmd_spectrum(&sys, &pot, matrix_csv.as_deref(), &out),
        Command::Density { sys, pot, out } => cmd_density(&sys, &pot, &out),
        Command::Uvcheck { sys, pot, state, t_min, t_max, t_count, out } => {
            let scan = TScan::LogSpaced { min: t_min, max: t_max, count: t_count };
            cmd_uvcheck(&sys, &pot, state, scan, &out)
        }
        Command::Lieb { sys, rho, max_iter, out } => cmd_lieb(&sys, &rho, max_iter, seed, &out),
        Command::Pure { sys, rho, restarts, out } => cmd_pure(&sys, &rho, restarts, seed, &out),
        Command::TriangleF { rho, out } => cmd_triangle_f(&rho, &out),
        Command::Minimize { sys, pot, functional, out } => cmd_minimize(&sys, &pot, functional, seed, &out),
        Command::Invert { sys, rho, out } => cmd_invert(&sys, &rho, seed, &out),
        Command::Atlas { sys, square_st, range, steps, axis, base, no_classify, manifest, projection, image, out } => {
            let grid = grid_spec(&sys, square_st, range, steps, &axis, base.as_deref())?;
            cmd_atlas(&sys, &grid, !no_classify, manifest.as_deref(), projection, image.as_deref(), &out)
        }
        Command::Surface { sys, k, restarts, out } => cmd_surface(&sys, k, restarts, seed, &out),
    }
}

fn input(msg: impl Into<String>) -> Failure {
    Failure::Input(msg.into())
}

fn emit(out: &Output, text: &str) -> io::Result<()> {
    match &out.output {
        Some(p) => fs::write(p, text),
        None => {
            let mut s = io::stdout().lock();
            s.write_all(text.as_bytes())?;
            if !text.ends_with('\n') {
                s.write_all(b"\n")?;
            }
            Ok(())
        }
    }
}

fn emit_json(out: &Output, v: &Value) -> io::Result<()> {
    emit(out, &serde_json::to_string_pretty(v).expect("json value"))
}

/// "1,2,3", "1 2 3" or "@file" holding a JSON array or the same plain list.
fn parse_list(s: &str) -> Result<Vec<f64>, Failure> {
    let text = match s.strip_prefix('@') {
        Some(path) => fs::read_to_string(path).map_err(|e| input(format!("{path}: {e}")))?,
        None => s.to_string(),
    };
    let t = text.trim();
    if t.starts_with('[') {
        return serde_json::from_str(t).map_err(|e| input(format!("bad list: {e}")));
    }
    t.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|x| !x.is_empty())
        .map(|x| x.parse::<f64>().map_err(|_| input(format!("not a number: {x}"))))
        .collect()
}

fn load_graph(spec: &str) -> Result<Graph, Failure> {
    if let Some(g) = Graph::builtin(spec) {
        return Ok(g);
    }
    if Path::new(spec).exists() {
        return Ok(Graph::load(spec)?);
    }
    Err(input(format!("{spec} is neither a built-in graph nor a readable file")))
}

fn load_system(args: &SystemArgs) -> Result<(Graph, InternalHamiltonian<f64>, Arc<fermigraph::FockBasis>), Failure> {
    let g = load_graph(&args.graph)?;
    let m = g.vertex_count();
    let h0 = match &args.interaction {
        None => InternalHamiltonian::kinetic(&g),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| input(format!("{}: {e}", p.display())))?;
            let rows: Vec<Vec<f64>> = serde_json::from_str(&text).map_err(|e| input(format!("interaction: {e}")))?;
            if rows.len() != m {
                return Err(input(format!("interaction has {} rows for M = {m}", rows.len())));
            }
            let w = Matrix::from_rows(&rows).ok_or_else(|| input("interaction rows differ in length"))?;
            InternalHamiltonian::new(OneBodyHamiltonian::negative_laplacian(&g), TwoBodyInteraction::new(w)?)?
        }
    };
    let basis = Arc::new(build_basis(m, args.n)?);
    Ok((g, h0, basis))
}

fn potential(args: &PotentialArgs, m: usize) -> Result<Vec<f64>, Failure> {
    let v = match (&args.potential, &args.st) {
        (Some(p), _) => parse_list(p)?,
        (None, Some(st)) => {
            let st = parse_list(st)?;
            if m != 4 || st.len() != 2 {
                return Err(input("--st takes \"s,t\" and needs a 4-vertex graph"));
            }
            let (s, t) = (st[0], st[1]);
            vec![s + t, -s + t, -s - t, s - t]
        }
        (None, None) => vec![0.0; m],
    };
    if v.len() != m {
        return Err(input(format!("potential has {} entries for M = {m}", v.len())));
    }
    Ok(Potential::new(v)?.values().to_vec())
}

fn density_target(arg: &DensityArg, n: usize) -> Result<Vec<f64>, Failure> {
    let rho = parse_list(&arg.rho)?;
    Ok(if arg.project { project_hypersimplex(&rho, n) } else { rho })
}

fn cmd_spectrum(sys: &SystemArgs, pot: &PotentialArgs, matrix_csv: Option<&Path>, out: &Output) -> Run {
    let (_, h0, basis) = load_system(sys)?;
    let v = potential(pot, basis.m())?;
    let op = h0.assemble(&Potential::new(v)?, &basis)?;
    if let Some(p) = matrix_csv {
        op.write_csv(fs::File::create(p)?)?;
    }
    let spec = eigendecompose(&op)?;
    let gm = GroundManifold::from_spectrum(&spec, DEGENERACY_TOL);
    emit_json(
        out,
        &json!({
            "m": basis.m(),
            "n": basis.n(),
            "dimension": basis.len(),
            "eigenvalues": spec.values,
            "levels": spec.levels(DEGENERACY_TOL),
            "ground_energy": gm.energy,
            "degeneracy": gm.degeneracy,
            "gap": gm.gap,
        }),
    )?;
    Ok(0)
}

fn cmd_density(sys: &SystemArgs, pot: &PotentialArgs, out: &Output) -> Run {
    let (_, h0, basis) = load_system(sys)?;
    let v = potential(pot, basis.m())?;
    let gm = fermigraph::spectra::ground_manifold(&h0.assemble(&Potential::new(v)?, &basis)?, DEGENERACY_TOL)?;
    if gm.is_degenerate() {
        eprintln!("warning: ground level is {}-fold degenerate; density of the first eigenvector", gm.degeneracy);
    }
    let mut buf = Vec::new();
    density_of(&gm.states[0]).write_csv(&mut buf)?;
    emit(out, &String::from_utf8(buf).expect("csv is utf-8"))?;
    Ok(0)
}

fn cmd_uvcheck(sys: &SystemArgs, pot: &PotentialArgs, state: usize, t_scan: TScan, out: &Output) -> Run {
    let (_, h0, basis) = load_system(sys)?;
    let v = Potential::new(potential(pot, basis.m())?)?;
    let free = h0.assemble_free(&basis)?;
    let gm = fermigraph::spectra::ground_manifold(&free.with_potential(v.values())?, DEGENERACY_TOL)?;
    let psi = gm
        .states
        .get(state)
        .ok_or_else(|| input(format!("--state {state} but the ground level has degeneracy {}", gm.degeneracy)))?;
    let verdict = certify_with(psi, &free, &v, &CertifyOptions { t_scan, ..Default::default() })?;
    let mut j = serde_json::to_value(&verdict).expect("verdict");
    j["energy"] = json!(gm.energy);
    j["degeneracy"] = json!(gm.degeneracy);
    emit_json(out, &j)?;
    Ok(0)
}

fn cmd_lieb(sys: &SystemArgs, rho: &DensityArg, max_iter: usize, seed: u64, out: &Output) -> Run {
    let (_, h0, basis) = load_system(sys)?;
    let target = density_target(rho, basis.n())?;
    let system = System::new(h0, basis)?;
    let r = lieb_f(&target, &system, &LiebOptions { max_iter, seed, ..Default::default() })?;
    let mut j = serde_json::to_value(&r).expect("lieb result");
    if r.value.is_infinite() {
        j["value"] = json!("inf");
    }
    emit_json(out, &j)?;
    Ok(if r.status == LiebStatus::Stalled { EXIT_NUMERICAL } else { 0 })
}

fn cmd_pure(sys: &SystemArgs, rho: &DensityArg, restarts: usize, seed: u64, out: &Output) -> Run {
    let (_, h0, basis) = load_system(sys)?;
    let target = density_target(rho, basis.n())?;
    let system = System::new(h0, basis)?;
    let r = pure_f(&target, &system, &PureOptions { restarts, seed, ..Default::default() })?;
    let mut j = serde_json::to_value(&r).expect("pure result");
    j["minimizer_psi"] = serde_json::from_str(&r.minimizer_psi.to_json()).expect("wave function json");
    emit_json(out, &j)?;
    if !r.converged {
        eprintln!("warning: constraint residual {:e} above tolerance after {restarts} restarts", r.constraint_residual);
        return Ok(EXIT_NUMERICAL);
    }
    Ok(0)
}

fn cmd_triangle_f(rho: &DensityArg, out: &Output) -> Run {
    let target = density_target(rho, 2)?;
    let r = triangle_f_analytic(&target)?;
    emit_json(out, &serde_json::to_value(&r).expect("triangle result"))?;
    Ok(0)
}

fn cmd_minimize(sys: &SystemArgs, pot: &PotentialArgs, kind: FunctionalKind, seed: u64, out: &Output) -> Run {
    let (g, h0, basis) = load_system(sys)?;
    let v = potential(pot, basis.m())?;
    let system = System::new(h0, basis)?;
    let tri;
    let lieb;
    let pure;
    let f: &dyn DensityFunctional = match kind {
        FunctionalKind::Triangle => {
            if g != Graph::triangle() || system.n() != 2 || sys.interaction.is_some() {
                return Err(input("the closed-form functional needs --graph triangle --n 2 without interaction"));
            }
            tri = TriangleFunctional::new();
            &tri
        }
        FunctionalKind::Lieb => {
            lieb = LiebFunctional { system: &system, options: LiebOptions { seed, ..Default::default() } };
            &lieb
        }
        FunctionalKind::Pure => {
            pure = PureFunctional { system: &system, options: PureOptions { seed, restarts: 8, ..Default::default() } };
            &pure
        }
    };
    let r = minimize_energy_via_functional(&v, f, &MinimizeOptions::default())?;
    emit_json(out, &serde_json::to_value(&r).expect("minimisation result"))?;
    Ok(if r.converged { 0 } else { EXIT_NUMERICAL })
}

fn cmd_invert(sys: &SystemArgs, rho: &DensityArg, seed: u64, out: &Output) -> Run {
    let (_, h0, basis) = load_system(sys)?;
    let target = density_target(rho, basis.n())?;
    let system = System::new(h0, basis)?;
    let r = lieb_f(&target, &system, &LiebOptions { seed, ..Default::default() })?;
    if r.status == LiebStatus::OutsideDomain {
        return Err(input("target density lies outside the hypersimplex"));
    }
    let v = Potential::new(r.maximizer_v.clone())?;
    let gm = GroundManifold::from_spectrum(&system.spectrum(v.values())?, DEGENERACY_TOL);
    let verdict = certify_with(&gm.states[0], system.free_operator(), &v, &CertifyOptions::default())?;
    emit_json(
        out,
        &json!({
            "v": r.maximizer_v,
            "residual": r.density_residual,
            "radius": r.radius,
            "value": r.value,
            "certificate_gap": r.certificate_gap,
            "status": r.status,
            "degeneracy": gm.degeneracy,
            "uv_status": verdict.status,
            "kernel_basis": verdict.kernel_basis,
            "witness": verdict.witness,
        }),
    )?;
    Ok(if r.status == LiebStatus::Stalled { EXIT_NUMERICAL } else { 0 })
}

fn grid_spec(
    sys: &SystemArgs,
    square_st: bool,
    range: f64,
    steps: usize,
    axes: &[String],
    base: Option<&str>,
) -> Result<PotentialGridSpec, Failure> {
    let m = load_graph(&sys.graph)?.vertex_count();
    let mut spec = if square_st {
        if m != 4 {
            return Err(input("--square-st needs a 4-vertex graph"));
        }
        PotentialGridSpec::square_st(range, steps)
    } else {
        PotentialGridSpec { base: vec![0.0; m], axes: Vec::new() }
    };
    for a in axes {
        let parts: Vec<&str> = a.split(':').collect();
        if parts.len() != 5 {
            return Err(input(format!("axis {a}: expected name:u1,…,uM:lo:hi:steps")));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| input(format!("axis {a}: not a number: {s}")));
        spec.axes.push(GridAxis {
            name: parts[0].to_string(),
            direction: parse_list(parts[1])?,
            lo: num(parts[2])?,
            hi: num(parts[3])?,
            steps: parts[4].parse().map_err(|_| input(format!("axis {a}: bad step count")))?,
        });
    }
    if let Some(b) = base {
        spec.base = parse_list(b)?;
    }
    spec.validate()?;
    Ok(spec)
}

fn cmd_atlas(
    sys: &SystemArgs,
    grid: &PotentialGridSpec,
    classify: bool,
    manifest: Option<&Path>,
    projection: Option<Projection>,
    image: Option<&Path>,
    out: &Output,
) -> Run {
    let (g, h0, basis) = load_system(sys)?;
    let opts = AtlasOptions { classify, ..Default::default() };
    let cells = atlas::sweep(grid, &h0, &basis, &opts)?;
    let mut buf = Vec::new();
    atlas::write_atlas_csv(grid, &cells, &mut buf)?;
    emit(out, &String::from_utf8(buf).expect("csv is utf-8"))?;
    if let Some(p) = manifest {
        let extra = json!({ "graph": serde_json::from_str::<Value>(&g.to_json()).expect("graph json"), "n": basis.n() });
        fs::write(p, atlas::manifest_json(grid, &opts, extra)?)?;
    }
    if let (Some(proj), Some(p)) = (projection, image) {
        let m = basis.m();
        let projector = match proj {
            Projection::Identity => Projector::identity(m),
            Projection::Triangle if m == 3 => Projector::barycentric_triangle(),
            Projection::Octahedron if m == 4 => Projector::octahedron_middle_plane(),
            _ => return Err(input("projection does not match the number of vertices")),
        };
        let pts = atlas::density_image(&cells, &projector)?;
        let mut text = String::new();
        let dims: Vec<String> = (1..=projector.dim()).map(|i| format!("x{i}")).collect();
        text.push_str(&format!("index,{},degeneracy,uv_status\n", dims.join(",")));
        for q in pts {
            let xs: Vec<String> = q.point.iter().map(|x| x.to_string()).collect();
            text.push_str(&format!("{},{},{},{}\n", q.index, xs.join(","), q.degeneracy, q.uv_status.as_str()));
        }
        fs::write(p, text)?;
    }
    Ok(0)
}

fn cmd_surface(sys: &SystemArgs, k: usize, restarts: usize, seed: u64, out: &Output) -> Run {
    let (_, h0, basis) = load_system(sys)?;
    if k < 2 {
        return Err(input("--k must be at least 2"));
    }
    let pts = functionals::interior_lattice(basis.m(), basis.n(), k);
    let system = System::new(h0, basis)?;
    let rows = functionals::functional_surface(
        &pts,
        &system,
        &LiebOptions { seed, ..Default::default() },
        &PureOptions { restarts, seed, ..Default::default() },
    )?;
    let mut buf = Vec::new();
    functionals::write_surface_csv(&rows, &mut buf)?;
    emit(out, &String::from_utf8(buf).expect("csv is utf-8"))?;
    Ok(0)
}
