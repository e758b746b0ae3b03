//! Command-line front end: curve classification, tree exports, symbol
//! classification and decomposition, certified relation reduction, and the
//! presentation/homology report.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use ellsym::curve::CurveSpec;
use ellsym::present;
use ellsym::relations::{
    edge_flows, is_cusp_balanced, reduce_with_trace, verify_certificate_detailed,
    Certificate, CertificateData, FormalSum,
};
use ellsym::sampling::{random_balanced_sum, SplitMix64};
use ellsym::symbols;
use ellsym::ttree::{Tree, VertexAddress};

#[derive(Parser)]
#[command(
    name = "ellsym",
    about = "Modular symbols over elliptic function fields via labeled trees",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Dot,
}

#[derive(Subcommand)]
enum Cmd {
    /// Classify every x-line of the curve and count rational points.
    CurveInfo {
        /// Curve in the form q=<int>;a=[a1,a2,a3,a4,a6]
        curve: String,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Print the labeled quotient tree, rays truncated at --depth.
    QuotientTree {
        curve: String,
        #[arg(long, default_value_t = 3)]
        depth: u32,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Print the labeled ball of the given radius around an address.
    TreeBall {
        curve: String,
        /// Vertex address, e.g. /1/0 (the root is /)
        addr: String,
        radius: u32,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Match a symbol {addr,addr} against the four reduced templates.
    Classify {
        curve: String,
        symbol: String,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Write a symbol as a telescoping sum of reduced symbols.
    Decompose {
        curve: String,
        symbol: String,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Reduce a cusp-balanced formal sum file to a certificate over the
    /// nine generator relations. Exit 0 iff the certificate verifies.
    Reduce { curve: String, file: PathBuf },
    /// Verify a certificate file against a formal sum file.
    Verify {
        curve: String,
        file: PathBuf,
        cert: PathBuf,
    },
    /// Generators, relation matrix, Smith normal form, and homology.
    Presentation {
        curve: String,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// Also dump the relation matrix as CSV to this path.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run the seeded property suite on oracle-generated relations.
    Fuzz {
        curve: String,
        #[arg(long, default_value_t = 20)]
        n: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 9)]
        depth: u32,
    },
}

fn parse_curve(s: &str) -> Result<Tree, String> {
    let spec: CurveSpec = s.parse().map_err(|e| format!("{e}"))?;
    Ok(Tree::new(spec))
}

#[derive(Serialize)]
struct FiberRow {
    x: String,
    class: String,
    solutions: Vec<String>,
}

#[derive(Serialize)]
struct CurveInfo {
    curve: String,
    discriminant: u64,
    fibers: Vec<FiberRow>,
    point_count: usize,
    hasse_bound_holds: bool,
}

fn curve_info(tree: &Tree, format: Format) -> Result<String, String> {
    let spec = tree.spec();
    let fibers: Vec<FiberRow> = spec
        .all_x()
        .into_iter()
        .map(|x| {
            let f = spec.fiber_solutions(x);
            FiberRow {
                x: x.to_string(),
                class: f.kind.to_string(),
                solutions: f.solutions.iter().map(|p| p.to_string()).collect(),
            }
        })
        .collect();
    let info = CurveInfo {
        curve: spec.to_string(),
        discriminant: spec.discriminant(),
        fibers,
        point_count: spec.point_count(),
        hasse_bound_holds: spec.hasse_bound_holds(),
    };
    match format {
        Format::Json => to_json(&info),
        _ => {
            let mut out = String::new();
            out.push_str(&format!("curve: {}\n", info.curve));
            out.push_str(&format!("discriminant: {}\n", info.discriminant));
            for row in &info.fibers {
                out.push_str(&format!(
                    "x={}: {} [{}]\n",
                    row.x,
                    row.class,
                    row.solutions.join(", ")
                ));
            }
            out.push_str(&format!("points: {}\n", info.point_count));
            out.push_str(&format!(
                "hasse bound: {}\n",
                if info.hasse_bound_holds { "ok" } else { "violated" }
            ));
            Ok(out)
        }
    }
}

#[derive(Serialize)]
struct QuotientVertex {
    label: String,
    vertex_type: String,
    invariant: i32,
}

#[derive(Serialize)]
struct QuotientInfo {
    curve: String,
    rays: usize,
    vertices: Vec<QuotientVertex>,
    edges: Vec<[String; 2]>,
}

fn quotient_tree(tree: &Tree, depth: u32, format: Format) -> Result<String, String> {
    let quot = tree.quotient();
    match format {
        Format::Dot => Ok(quot.to_dot(depth)),
        Format::Json => {
            let info = QuotientInfo {
                curve: tree.spec().to_string(),
                rays: quot.ray_points().len(),
                vertices: quot
                    .vertices_to_depth(depth)
                    .into_iter()
                    .map(|v| QuotientVertex {
                        label: v.to_string(),
                        vertex_type: v.type_tag().to_string(),
                        invariant: v.invariant(),
                    })
                    .collect(),
                edges: quot
                    .edges_to_depth(depth)
                    .into_iter()
                    .map(|(a, b)| [a.to_string(), b.to_string()])
                    .collect(),
            };
            to_json(&info)
        }
        Format::Text => {
            let mut out = String::new();
            for v in quot.vertices_to_depth(depth) {
                out.push_str(&format!("{v} [{}, {}]\n", v.type_tag(), v.invariant()));
            }
            out.push_str(&format!("rays: {}\n", quot.ray_points().len()));
            Ok(out)
        }
    }
}

#[derive(Serialize)]
struct BallVertex {
    addr: String,
    label: String,
    invariant: i32,
}

fn tree_ball(tree: &Tree, addr: &str, radius: u32, format: Format) -> Result<String, String> {
    let center: VertexAddress = addr.parse().map_err(err_str)?;
    match format {
        Format::Dot => tree.ball_to_dot(&center, radius).map_err(err_str),
        Format::Json => {
            let rows: Vec<BallVertex> = tree
                .ball(&center, radius)
                .map_err(err_str)?
                .into_iter()
                .map(|v| BallVertex {
                    addr: v.addr.to_string(),
                    label: v.label.to_string(),
                    invariant: v.invariant(),
                })
                .collect();
            to_json(&rows)
        }
        Format::Text => {
            let mut out = String::new();
            for v in tree.ball(&center, radius).map_err(err_str)? {
                out.push_str(&format!("{} {} [{}]\n", v.addr, v.label, v.invariant()));
            }
            Ok(out)
        }
    }
}

fn classify_cmd(tree: &Tree, symbol: &str, format: Format) -> Result<String, String> {
    let sym = symbols::parse_symbol(tree, symbol).map_err(err_str)?;
    let diag = symbols::diagnostics(tree, &sym).map_err(err_str)?;
    match format {
        Format::Json => to_json(&diag),
        _ => {
            let mut out = String::new();
            out.push_str(&format!("symbol: {}\n", diag.symbol));
            out.push_str(&format!("labels: {}\n", diag.labels.join(", ")));
            let profile: Vec<String> = diag.profile.iter().map(|p| p.to_string()).collect();
            out.push_str(&format!("profile: {}\n", profile.join(",")));
            match &diag.class {
                Some(c) => out.push_str(&format!("reduced: {c}\n")),
                None => out.push_str("not reduced\n"),
            }
            Ok(out)
        }
    }
}

#[derive(Serialize)]
struct DecomposeOut {
    symbol: String,
    pieces: Vec<DecomposePiece>,
}

#[derive(Serialize)]
struct DecomposePiece {
    symbol: String,
    class: String,
}

fn decompose_cmd(tree: &Tree, symbol: &str, format: Format) -> Result<String, String> {
    let sym = symbols::parse_symbol(tree, symbol).map_err(err_str)?;
    let pieces = symbols::decompose(tree, &sym).map_err(err_str)?;
    let mut rows = Vec::new();
    for p in &pieces {
        let class = symbols::classify(tree, p)
            .map_err(err_str)?
            .reduced()
            .map(|c| c.to_string())
            .unwrap_or_else(|| "not reduced".into());
        rows.push(DecomposePiece {
            symbol: p.to_string(),
            class,
        });
    }
    let out = DecomposeOut {
        symbol: sym.to_string(),
        pieces: rows,
    };
    match format {
        Format::Json => to_json(&out),
        _ => {
            let mut s = String::new();
            s.push_str(&format!("symbol: {}\n", out.symbol));
            s.push_str(&format!("pieces: {}\n", out.pieces.len()));
            for p in &out.pieces {
                s.push_str(&format!("{}  [{}]\n", p.symbol, p.class));
            }
            Ok(s)
        }
    }
}

#[derive(Serialize)]
struct ReduceOut {
    #[serde(flatten)]
    certificate: CertificateData,
    verified: bool,
    stages: Vec<(String, u64)>,
}

fn run() -> Result<(String, u8), (String, u8)> {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e)
            if matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            ) =>
        {
            return Ok((e.to_string(), 0));
        }
        Err(e) => return Err((e.to_string(), 1)),
    };
    let domain = |e: String| (format!("error: {e}"), 1u8);
    match cli.cmd {
        Cmd::CurveInfo { curve, format } => {
            let tree = parse_curve(&curve).map_err(domain)?;
            Ok((curve_info(&tree, format).map_err(domain)?, 0))
        }
        Cmd::QuotientTree {
            curve,
            depth,
            format,
        } => {
            let tree = parse_curve(&curve).map_err(domain)?;
            Ok((quotient_tree(&tree, depth, format).map_err(domain)?, 0))
        }
        Cmd::TreeBall {
            curve,
            addr,
            radius,
            format,
        } => {
            let tree = parse_curve(&curve).map_err(domain)?;
            Ok((tree_ball(&tree, &addr, radius, format).map_err(domain)?, 0))
        }
        Cmd::Classify {
            curve,
            symbol,
            format,
        } => {
            let tree = parse_curve(&curve).map_err(domain)?;
            Ok((classify_cmd(&tree, &symbol, format).map_err(domain)?, 0))
        }
        Cmd::Decompose {
            curve,
            symbol,
            format,
        } => {
            let tree = parse_curve(&curve).map_err(domain)?;
            Ok((decompose_cmd(&tree, &symbol, format).map_err(domain)?, 0))
        }
        Cmd::Reduce { curve, file } => {
            let tree = parse_curve(&curve).map_err(domain)?;
            let text = fs::read_to_string(&file)
                .map_err(|e| domain(format!("{}: {e}", file.display())))?;
            let sum = FormalSum::parse(&tree, &text)
                .map_err(err_str)
                .map_err(domain)?;
            let (cert, trace) = reduce_with_trace(&tree, &sum)
                .map_err(err_str)
                .map_err(domain)?;
            let verified = verify_certificate_detailed(&tree, &sum, &cert).is_ok();
            let out = ReduceOut {
                certificate: cert.to_data(),
                verified,
                stages: trace.stages,
            };
            let json = to_json(&out).map_err(domain)?;
            Ok((json, if verified { 0 } else { 2 }))
        }
        Cmd::Verify { curve, file, cert } => {
            let tree = parse_curve(&curve).map_err(domain)?;
            let text = fs::read_to_string(&file)
                .map_err(|e| domain(format!("{}: {e}", file.display())))?;
            let sum = FormalSum::parse(&tree, &text)
                .map_err(err_str)
                .map_err(domain)?;
            let cert_text = fs::read_to_string(&cert)
                .map_err(|e| domain(format!("{}: {e}", cert.display())))?;
            let data: CertificateData =
                serde_json::from_str(&cert_text).map_err(|e| domain(e.to_string()))?;
            let cert = Certificate::from_data(&tree, &data)
                .map_err(err_str)
                .map_err(domain)?;
            match verify_certificate_detailed(&tree, &sum, &cert) {
                Ok(()) => Ok(("verified\n".into(), 0)),
                Err(reason) => Ok((format!("verification failed: {reason}\n"), 2)),
            }
        }
        Cmd::Presentation { curve, format, csv } => {
            let tree = parse_curve(&curve).map_err(domain)?;
            let report = present::presentation(&tree)
                .map_err(err_str)
                .map_err(domain)?;
            if let Some(path) = csv {
                let matrix = present::relation_rows(&tree)
                    .map_err(err_str)
                    .map_err(domain)?;
                fs::write(&path, matrix.to_csv())
                    .map_err(|e| domain(format!("{}: {e}", path.display())))?;
            }
            match format {
                Format::Json => Ok((to_json(&report).map_err(domain)?, 0)),
                _ => {
                    let mut out = String::new();
                    out.push_str(&format!("curve: {}\n", report.curve));
                    out.push_str(&format!(
                        "classes: e={} s={} o={} ns={} total={}\n",
                        report.class_counts.e,
                        report.class_counts.s,
                        report.class_counts.o,
                        report.class_counts.ns,
                        report.class_counts.total
                    ));
                    out.push_str(&format!(
                        "matrix: {} rows x {} cols, rank {}\n",
                        report.matrix_rows, report.matrix_cols, report.rank
                    ));
                    let nontrivial: Vec<&String> = report
                        .invariant_factors
                        .iter()
                        .filter(|f| f.as_str() != "1")
                        .collect();
                    out.push_str(&format!(
                        "invariant factors > 1: {}\n",
                        if nontrivial.is_empty() {
                            "none".to_string()
                        } else {
                            nontrivial
                                .iter()
                                .map(|s| s.as_str())
                                .collect::<Vec<_>>()
                                .join(",")
                        }
                    ));
                    out.push_str(&format!(
                        "homology: free rank {} torsion [{}]\n",
                        report.homology.free_rank,
                        report.homology.torsion.join(",")
                    ));
                    out.push_str(&format!(
                        "ends cross-check: ends={} expected free rank {} -> {}\n",
                        report.homology.ends,
                        report.homology.expected_free_rank_from_ends,
                        if report.homology.matches_ends_oracle {
                            "match"
                        } else {
                            "MISMATCH"
                        }
                    ));
                    Ok((out, 0))
                }
            }
        }
        Cmd::Fuzz {
            curve,
            n,
            seed,
            depth,
        } => {
            let tree = parse_curve(&curve).map_err(domain)?;
            let mut rng = SplitMix64::new(seed);
            let mut out = String::new();
            for case in 0..n {
                let sum = random_balanced_sum(&tree, &mut rng, 4, 2, 4, depth)
                    .map_err(err_str)
                    .map_err(domain)?;
                if !is_cusp_balanced(&sum) {
                    return Ok((
                        format!("case {case}: generator produced an unbalanced sum\n"),
                        2,
                    ));
                }
                let flows = edge_flows(&tree, &sum).map_err(err_str).map_err(domain)?;
                if !flows.all_balanced() {
                    return Ok((format!("case {case}: edge balance violated\n"), 2));
                }
                let (cert, _) = match reduce_with_trace(&tree, &sum) {
                    Ok(v) => v,
                    Err(e) => return Ok((format!("case {case}: reduction failed: {e}\n"), 2)),
                };
                if let Err(reason) = verify_certificate_detailed(&tree, &sum, &cert) {
                    return Ok((format!("case {case}: certificate rejected: {reason}\n"), 2));
                }
                out.push_str(&format!(
                    "case {case}: terms={} splits={} instances={} ok\n",
                    sum.len(),
                    cert.splits.len(),
                    cert.combination.len()
                ));
            }
            out.push_str(&format!("{n} cases passed\n"));
            Ok((out, 0))
        }
    }
}

fn err_str<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn to_json<T: Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string_pretty(value)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    match run() {
        Ok((out, code)) => {
            print!("{out}");
            ExitCode::from(code)
        }
        Err((msg, code)) => {
            eprintln!("{msg}");
            ExitCode::from(code)
        }
    }
}
