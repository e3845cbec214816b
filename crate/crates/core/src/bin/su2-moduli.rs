use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use su2_moduli::moduli::{self, ExtendedPoint, SurfaceSignature, Twist};
use su2_moduli::sheaves::{self, FramedSheafData};
use su2_moduli::trinion::{self, AngleTriple};
use su2_moduli::verlinde::{self, CountMethod, DecompositionGraph};
use su2_moduli::{Error, Result};

#[derive(Parser)]
#[command(name = "su2-moduli", version, about = "SU(2) moduli spaces of punctured surfaces")]
struct Cli {
    /// Machine-readable JSON output
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Level-k lattice count of a pants decomposition
    Verlinde(VerlindeArgs),
    /// Glued moment polytope as an H-representation
    Polytope(PolytopeArgs),
    /// Trinion reconstruction, angles and real involution
    #[command(subcommand)]
    Trinion(TrinionCommand),
    /// Points of the extended moduli space
    #[command(subcommand)]
    Rep(RepCommand),
    /// Framed parabolic sheaves on the three-marked line
    #[command(subcommand)]
    Sheaf(SheafCommand),
}

#[derive(Args)]
struct VerlindeArgs {
    #[arg(long)]
    genus: usize,
    #[arg(long)]
    level: u32,
    /// Comma-separated leg labels
    #[arg(long, value_delimiter = ',')]
    legs: Vec<u32>,
    /// Number of punctures labelled 0 (ignored when --legs is given)
    #[arg(long, default_value_t = 0)]
    punctures: usize,
    #[arg(long, default_value = "dp")]
    method: CountMethod,
    #[arg(long)]
    threads: Option<usize>,
    /// Compare with the closed-form sum
    #[arg(long)]
    check: bool,
    /// Decomposition graph file instead of the standard one
    #[arg(long)]
    graph: Option<PathBuf>,
}

#[derive(Args)]
struct PolytopeArgs {
    #[arg(long, default_value_t = 0)]
    genus: usize,
    /// Comma-separated leg values in [0,1], decimal or p/q
    #[arg(long, value_delimiter = ',')]
    legs: Vec<String>,
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum TrinionCommand {
    /// Build the trinion point with the given holonomy angles
    Reconstruct {
        #[arg(long, value_delimiter = ',', num_args = 1, required = true)]
        angles: Vec<f64>,
    },
    /// Read the holonomy angles of a trinion point
    Angles {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Apply the real involution
    Involution {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

#[derive(Subcommand)]
enum RepCommand {
    /// Random point satisfying the relation
    Sample {
        #[arg(long)]
        genus: usize,
        #[arg(long, default_value_t = 0)]
        punctures: usize,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        twist: i8,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Angles of punctures 2..n
        #[arg(long, value_delimiter = ',')]
        angles: Vec<f64>,
    },
    /// Geodesic distance of the relation product from the twist
    Residual {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Canonical representative modulo conjugation
    Normalize {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Glue puncture i of --left to puncture j of --right (or of --left itself with --self)
    Glue {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: Option<PathBuf>,
        #[arg(long)]
        i: usize,
        #[arg(long)]
        j: usize,
        #[arg(long = "self")]
        self_glue: bool,
    },
    /// Twist flow along a recorded curve; one JSON point per line
    Flow {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 0)]
        curve: usize,
        #[arg(long, allow_hyphen_values = true)]
        step: f64,
        #[arg(long, default_value_t = 1)]
        steps: usize,
    },
    /// Rank of the differential of the relation map
    Rank {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        h: f64,
    },
}

#[derive(Subcommand)]
enum SheafCommand {
    /// Case, sheaf type and point of P3
    Classify {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// The four invariants I0..I3
    Invariants {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Semistability, with a destabilizing one-parameter subgroup when unstable
    Semistable {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn read_point(path: &Path) -> Result<ExtendedPoint> {
    serde_json::from_str(&read(path)?).map_err(|e| Error::Parse(e.to_string()))
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("serializable")
}

/// JSON number when it fits in `u64`, decimal string otherwise.
fn big(n: u128) -> serde_json::Value {
    u64::try_from(n).map(|v| json!(v)).unwrap_or_else(|_| json!(n.to_string()))
}

fn trinion_angles(p: &ExtendedPoint) -> Result<AngleTriple> {
    if p.signature.genus != 0 || p.signature.punctures != 3 {
        return Err(Error::InvalidSignature("expected a trinion point".into()));
    }
    Ok(trinion::rep_to_angles(p))
}

fn graph_for(genus: usize, legs: usize, file: &Option<PathBuf>) -> Result<DecompositionGraph> {
    match file {
        Some(f) => read(f)?.parse(),
        None => verlinde::standard_decomposition(genus, legs),
    }
}

fn run(cli: Cli) -> Result<Vec<String>> {
    let json = cli.json;
    let mut out = Vec::new();
    match cli.command {
        Command::Verlinde(a) => {
            let legs = if a.legs.is_empty() { vec![0; a.punctures] } else { a.legs };
            let graph = graph_for(a.genus, legs.len(), &a.graph)?;
            let count = verlinde::count_lattice_points(&graph, a.level, &legs, a.method, a.threads)?;
            let check = if a.check {
                Some(verlinde::verlinde_closed_form(graph.genus(), a.level, &legs)?)
            } else {
                None
            };
            if json {
                let mut v = json!({ "count": big(count), "method": a.method });
                if let Some((closed, residue)) = check {
                    v["closed_form"] = big(closed);
                    v["residue"] = json!(residue);
                    v["agree"] = json!(closed == count);
                }
                out.push(v.to_string());
            } else {
                out.push(count.to_string());
                if let Some((closed, residue)) = check {
                    let verdict = if closed == count { "agree" } else { "DISAGREE" };
                    out.push(format!("closed form {closed} (residue {residue:.1e}): {verdict}"));
                }
            }
        }
        Command::Polytope(a) => {
            let legs = a.legs.iter().map(|s| verlinde::parse_rational(s)).collect::<Result<Vec<_>>>()?;
            let graph = graph_for(a.genus, legs.len(), &a.graph)?;
            let poly = verlinde::moment_polytope(&graph, &legs)?;
            let text = if json { to_json(&poly) } else { poly.to_text().trim_end().to_string() };
            match a.out {
                Some(path) => {
                    fs::write(&path, format!("{text}\n")).map_err(|e| Error::Parse(e.to_string()))?;
                }
                None => out.push(text),
            }
        }
        Command::Trinion(t) => match t {
            TrinionCommand::Reconstruct { angles } => {
                if angles.len() != 3 {
                    return Err(Error::Parse("expected three angles".into()));
                }
                let p = trinion::angles_to_rep(AngleTriple::new([angles[0], angles[1], angles[2]]))?;
                if !json {
                    eprintln!(
                        "stratum {}, residual {:.1e}",
                        trinion::in_tetrahedron(trinion::rep_to_angles(&p)),
                        moduli::relation_residual(&p)
                    );
                }
                out.push(to_json(&p));
            }
            TrinionCommand::Angles { input } => {
                let a = trinion_angles(&read_point(&input)?)?;
                let stratum = trinion::in_tetrahedron(a);
                if json {
                    out.push(json!({ "angles": a.0, "stratum": stratum }).to_string());
                } else {
                    out.push(format!("{} {} {} ({stratum})", a.0[0], a.0[1], a.0[2]));
                }
            }
            TrinionCommand::Involution { input } => {
                out.push(to_json(&trinion::real_involution(&read_point(&input)?)?));
            }
        },
        Command::Rep(r) => match r {
            RepCommand::Sample { genus, punctures, twist, seed, angles } => {
                let twist = match twist {
                    1 => Twist::Plus,
                    -1 => Twist::Minus,
                    _ => return Err(Error::Parse("twist must be 1 or -1".into())),
                };
                let sig = SurfaceSignature::new(genus, punctures, twist);
                let targets = if angles.is_empty() { None } else { Some(angles.as_slice()) };
                out.push(to_json(&moduli::sample_point(sig, seed, targets)?));
            }
            RepCommand::Residual { input } => {
                let r = moduli::relation_residual(&read_point(&input)?);
                out.push(if json { json!({ "residual": r }).to_string() } else { format!("{r:e}") });
            }
            RepCommand::Normalize { input } => {
                out.push(to_json(&moduli::normalize(&read_point(&input)?)?));
            }
            RepCommand::Glue { left, right, i, j, self_glue } => {
                let p0 = read_point(&left)?;
                let glued = match (self_glue, right) {
                    (true, _) => moduli::self_glue(&p0, i, j)?,
                    (false, Some(r)) => moduli::glue(&p0, i, &read_point(&r)?, j)?,
                    (false, None) => return Err(Error::Parse("glue needs --right or --self".into())),
                };
                out.push(to_json(&glued));
            }
            RepCommand::Flow { input, curve, step, steps } => {
                let mut p = read_point(&input)?;
                for _ in 0..steps {
                    p = moduli::goldman_flow(&p, curve, step)?;
                    out.push(to_json(&p));
                }
            }
            RepCommand::Rank { input, h } => {
                let r = moduli::regularity_rank(&read_point(&input)?, h);
                out.push(if json { json!({ "rank": r }).to_string() } else { r.to_string() });
            }
        },
        Command::Sheaf(s) => match s {
            SheafCommand::Classify { input } => {
                let d = FramedSheafData::from_json(&read(&input)?)?;
                let k = sheaves::classify(&d)?;
                let p = sheaves::to_p3(&d)?;
                if json {
                    out.push(json!({ "classification": k, "p3": p }).to_string());
                } else {
                    let mut parts = vec![format!("case {}", k.case)];
                    if !k.torsion.is_empty() {
                        let t: Vec<String> = k.torsion.iter().map(|x| x.to_string()).collect();
                        parts.push(format!("torsion at {}", t.join(",")));
                    }
                    parts.push(k.sheaf_type.to_string());
                    parts.push(p.to_string());
                    out.push(parts.join(", "));
                }
            }
            SheafCommand::Invariants { input } => {
                let inv = sheaves::invariants(&FramedSheafData::from_json(&read(&input)?)?)?;
                if json {
                    out.push(to_json(&inv));
                } else {
                    out.push(sheaves::ProjectivePoint(inv.0).to_string());
                }
            }
            SheafCommand::Semistable { input } => {
                let d = FramedSheafData::from_json(&read(&input)?)?;
                let semistable = sheaves::is_semistable(&d)?;
                let witness = sheaves::destabilizing_witness(&d);
                if json {
                    out.push(json!({ "semistable": semistable, "witness": witness }).to_string());
                } else {
                    out.push(semistable.to_string());
                    if let Some(w) = witness {
                        out.push(format!("destabilized by m = {}, weights {:?}", w.m, w.weights));
                    }
                }
            }
        },
    }
    Ok(out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let json = cli.json;
    match run(cli) {
        Ok(lines) => {
            for l in lines {
                println!("{l}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            if json {
                eprintln!("{}", json!({ "error": e.code(), "message": e.to_string() }));
            } else {
                eprintln!("error[{}]: {e}", e.code());
            }
            ExitCode::from(1)
        }
    }
}
