use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use specmon::analysis::{context_free_probe, group_to_special, rational_member, MembershipResult, Nfa};
use specmon::graph::LabelledGraph;
use specmon::pieces::{check_biprefix, compute_piece_table, compute_unit_presentation, PieceTable};
use specmon::presentations::check_no_unit_proper_subword;
use specmon::rewriting::{common_ancestor, knuth_bendix, CompletionResult, Refutation};
use specmon::schutz::{cayley_ball, condensation, r1_via_tree, right_invertible_subgraph, stephen_ball, units_radius_for};
use specmon::treecons::check_bounded_folding;
use specmon::units::build_units_graph;
use specmon::{parse_presentation, Budget, EqualityVerdict, Oracle, RewritingSystem, SpecialPresentation, Strategy};

#[derive(Parser)]
#[command(name = "specmon", version, about = "Special monoid presentations: pieces, units, Schützenberger graphs")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    #[arg(long, global = true, default_value_t = 4)]
    radius: usize,
    #[arg(long, global = true, default_value_t = 3)]
    depth: usize,
    /// Word length bound for bounded equality search and path checks.
    #[arg(long, global = true, default_value_t = 12)]
    max_len: usize,
    #[arg(long, global = true, default_value_t = 16)]
    max_steps: usize,
    #[arg(long, global = true, value_enum, default_value_t = StrategyArg::Auto)]
    strategy: StrategyArg,
    /// Print JSON instead of a table.
    #[arg(long, global = true)]
    json: bool,
    /// Also write the main graph in DOT format.
    #[arg(long, global = true)]
    dot: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    /// Complete the presentation, falling back to bounded search.
    Auto,
    Complete,
    Bounded,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchutzMethod {
    Stephen,
    Tree,
    Cayley,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExportFormat {
    Text,
    Json,
    Rewriting,
    Units,
}

#[derive(Subcommand)]
enum Cmd {
    /// Invertible pieces, Δ-classes, Ξ and 𝔓.
    Pieces { file: PathBuf },
    /// Word problem for two words.
    Wp { file: PathBuf, u: String, v: String },
    /// Schützenberger graph of the units 𝔘 (radius = unit-ball radius).
    Units { file: PathBuf },
    /// Ball of ℜ₁.
    Schutz {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = SchutzMethod::Stephen)]
        method: SchutzMethod,
    },
    /// Ball of the Cayley graph and its strong components.
    Cayley { file: PathBuf },
    /// End classes of the Cayley graph, 𝔘 and ℜ₁.
    Ends { file: PathBuf },
    /// Structural checks on the presentation and 𝔘.
    Check { file: PathBuf },
    /// Membership of a word in the image of a regular language.
    Rational {
        file: PathBuf,
        word: String,
        #[arg(long, conflicts_with = "regex", required_unless_present = "regex")]
        nfa: Option<PathBuf>,
        #[arg(long)]
        regex: Option<String>,
    },
    /// Re-emit a presentation (group presentations are converted).
    Export {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = ExportFormat::Text)]
        format: ExportFormat,
    },
}

enum Failure {
    Usage(String),
    Domain(String),
}

type Res = Result<(), Failure>;

fn domain(e: impl std::fmt::Display) -> Failure {
    Failure::Domain(e.to_string())
}

fn load(path: &Path) -> Result<SpecialPresentation, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let t = text.trim_start();
    let r = if path.extension().is_some_and(|e| e == "json") {
        SpecialPresentation::from_json(&text).map_err(|e| e.to_string())
    } else if t.starts_with("Gp") {
        group_to_special(t).map_err(|e| e.to_string())
    } else {
        parse_presentation(&text).map_err(|e| e.to_string())
    };
    r.map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

impl Cli {
    fn budget(&self) -> Budget {
        Budget { max_len: self.max_len, max_steps: self.max_steps }
    }

    fn oracle(&self, p: &SpecialPresentation) -> Result<Oracle, Failure> {
        match self.strategy {
            StrategyArg::Auto => Ok(Oracle::auto(p, 200, 20, self.budget())),
            StrategyArg::Bounded => Ok(Oracle::bounded(p, self.budget())),
            StrategyArg::Complete => match knuth_bendix(&RewritingSystem::special(p), 200, 20) {
                CompletionResult::Complete(rs) => Ok(Oracle::new(p, Strategy::Complete(rs))),
                CompletionResult::Partial { .. } => Err(domain("completion did not finish within 200 rules")),
            },
        }
    }

    fn pieces(&self, o: &Oracle) -> Result<PieceTable, Failure> {
        compute_piece_table(o).map_err(domain)
    }

    fn emit(&self, j: serde_json::Value, table: impl FnOnce() -> String) {
        if self.json {
            println!("{}", serde_json::to_string_pretty(&j).unwrap());
        } else {
            print!("{}", table());
        }
    }

    fn write_dot(&self, g: &LabelledGraph, names: Option<&[String]>) -> Res {
        if let Some(path) = &self.dot {
            fs::write(path, g.to_dot(names)).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        }
        Ok(())
    }

    fn run(&self) -> Res {
        match &self.cmd {
            Cmd::Pieces { file } => {
                let p = load(file)?;
                let pt = self.pieces(&self.oracle(&p)?)?;
                self.emit(pt.to_json(&p), || {
                    let mut s = String::new();
                    for (k, x) in pt.pieces.iter().enumerate() {
                        s += &format!("{:<8} {:<12} class {}\n", pt.b_name(k), p.fmt_word(&x.word), x.class + 1);
                    }
                    s += &format!("kappa    {}\n", pt.kappa());
                    s += &format!("Xi       {}\n", pt.xi.iter().map(|w| p.fmt_word(w)).collect::<Vec<_>>().join(", "));
                    s += &format!("P        {}\n", pt.frak_p.iter().map(|w| p.fmt_word(w)).collect::<Vec<_>>().join(", "));
                    s
                });
                Ok(())
            }
            Cmd::Wp { file, u, v } => {
                let p = load(file)?;
                let o = self.oracle(&p)?;
                let (u, v) = (p.word(u).map_err(|e| Failure::Usage(e.to_string()))?, p.word(v).map_err(|e| Failure::Usage(e.to_string()))?);
                let verdict = o.verdict(&u, &v);
                let j = match &verdict {
                    EqualityVerdict::Equal(d) => {
                        let w = common_ancestor(d, &p).map_err(domain)?;
                        json!({
                            "verdict": "Equal",
                            "derivation": d.words().map(|w| p.fmt_word(w)).collect::<Vec<_>>(),
                            "common_ancestor": p.fmt_word(&w),
                        })
                    }
                    EqualityVerdict::NotEqual(Refutation::NormalForms(a, b)) => {
                        json!({ "verdict": "NotEqual", "normal_forms": [p.fmt_word(a), p.fmt_word(b)] })
                    }
                    EqualityVerdict::NotEqual(Refutation::Image { image, left, right }) => {
                        json!({ "verdict": "NotEqual", "image": image, "values": [left, right] })
                    }
                    EqualityVerdict::Unknown { explored } => json!({ "verdict": "Unknown", "explored": explored }),
                };
                self.emit(j.clone(), || match &verdict {
                    EqualityVerdict::Equal(_) => format!(
                        "Equal\n  {}\ncommon ancestor {}\n",
                        j["derivation"].as_array().unwrap().iter().map(|x| x.as_str().unwrap()).collect::<Vec<_>>().join("\n  "),
                        j["common_ancestor"].as_str().unwrap()
                    ),
                    EqualityVerdict::NotEqual(_) => format!("NotEqual {}\n", j),
                    EqualityVerdict::Unknown { explored } => format!("Unknown after {explored} words\n"),
                });
                match verdict {
                    EqualityVerdict::Unknown { .. } => Err(domain("equality undecided within the bound")),
                    _ => Ok(()),
                }
            }
            Cmd::Units { file } => {
                let p = load(file)?;
                let o = self.oracle(&p)?;
                let pt = self.pieces(&o)?;
                let u = build_units_graph(&o, &pt, self.radius).map_err(domain)?;
                let names = u.vertex_names(&p);
                self.write_dot(&u.graph, Some(&names))?;
                self.emit(u.to_json(&p), || {
                    let mut s = format!("vertices {}  edges {}\n", u.graph.num_vertices(), u.graph.num_edges());
                    s += &format!("unit presentation\n{}\n", compute_unit_presentation(&pt).to_text());
                    s
                });
                Ok(())
            }
            Cmd::Schutz { file, method } => {
                let p = load(file)?;
                let ball = match method {
                    SchutzMethod::Stephen => stephen_ball(&p, self.radius, 2).map_err(domain)?,
                    SchutzMethod::Tree => {
                        let o = self.oracle(&p)?;
                        let pt = self.pieces(&o)?;
                        let u = build_units_graph(&o, &pt, units_radius_for(&p, self.radius)).map_err(domain)?;
                        r1_via_tree(&u, &p, self.radius).map_err(domain)?
                    }
                    SchutzMethod::Cayley => {
                        let o = self.oracle(&p)?;
                        let pt = self.pieces(&o)?;
                        let c = cayley_ball(&o, self.radius).map_err(domain)?;
                        let ri = right_invertible_subgraph(&c, &o, &pt, 100_000).map_err(domain)?;
                        if !ri.uncertified.is_empty() {
                            eprintln!("warning: {} vertices neither certified nor refuted right invertible", ri.uncertified.len());
                        }
                        specmon::schutz::SchutzBall {
                            graph: ri.graph,
                            radius: self.radius,
                            method: specmon::schutz::Method::CayleyRestriction,
                            saturation: if ri.uncertified.is_empty() {
                                specmon::schutz::Saturation::Certified
                            } else {
                                specmon::schutz::Saturation::Heuristic
                            },
                            rounds: 0,
                        }
                    }
                };
                self.write_dot(&ball.graph, None)?;
                self.emit(ball.to_json(), || {
                    format!("vertices {}  edges {}  ({:?}, {:?})\n", ball.graph.num_vertices(), ball.graph.num_edges(), ball.method, ball.saturation)
                });
                Ok(())
            }
            Cmd::Cayley { file } => {
                let p = load(file)?;
                let o = self.oracle(&p)?;
                let c = cayley_ball(&o, self.radius).map_err(domain)?;
                let names: Vec<String> = c.elements.iter().map(|w| p.fmt_word(w)).collect();
                self.write_dot(&c.graph, Some(&names))?;
                let cond = condensation(&c, self.radius.saturating_sub(2));
                let mut spheres = vec![0usize; self.radius + 1];
                for &d in &c.distance {
                    spheres[d] += 1;
                }
                let mut j = c.graph.to_json();
                j["elements"] = json!(names);
                j["spheres"] = json!(spheres);
                j["condensation"] = json!({
                    "components": cond.num_components,
                    "acyclic": cond.acyclic,
                    "unique_entering": cond.unique_entering(),
                });
                self.emit(j, || {
                    format!(
                        "vertices {}  edges {}\nspheres {:?}\nstrong components {}  acyclic {}  unique entering edges {}\n",
                        c.graph.num_vertices(),
                        c.graph.num_edges(),
                        spheres,
                        cond.num_components,
                        cond.acyclic,
                        cond.unique_entering()
                    )
                });
                Ok(())
            }
            Cmd::Ends { file } => {
                let p = load(file)?;
                let o = self.oracle(&p)?;
                let pt = self.pieces(&o)?;
                let r = context_free_probe(&o, &pt, self.radius, self.depth);
                let mut j = serde_json::to_value(&r).unwrap();
                for probe in j["probes"].as_array_mut().unwrap() {
                    if let Some(rep) = probe.get_mut("report").and_then(|x| x.as_object_mut()) {
                        rep.remove("class_of");
                    }
                }
                self.emit(j, || {
                    let mut s = String::new();
                    for pr in &r.probes {
                        match (&pr.report, &pr.error) {
                            (Some(rep), _) => s += &format!("{:<15} counts {:?} stabilized {}\n", pr.graph, rep.counts, rep.stabilized),
                            (None, Some(e)) => s += &format!("{:<15} error: {e}\n", pr.graph),
                            _ => {}
                        }
                    }
                    s += &format!("verdict {:?}\n", r.verdict);
                    s
                });
                Ok(())
            }
            Cmd::Check { file } => {
                let p = load(file)?;
                let o = self.oracle(&p)?;
                let unit_sub = check_no_unit_proper_subword(&p, self.budget());
                let pt = self.pieces(&o)?;
                let biprefix = check_biprefix(&pt.piece_words());
                let u = build_units_graph(&o, &pt, self.radius).map_err(domain)?;
                let fold = check_bounded_folding(&u.graph, u.class_of(), &u.n_set(), self.max_len);
                let j = json!({
                    "complete_system": o.system().is_some(),
                    "no_unit_proper_subword": unit_sub.is_empty(),
                    "pieces_biprefix": biprefix.is_ok(),
                    "units_deterministic": u.graph.is_deterministic().is_ok(),
                    "overlap_free": fold.overlap_free,
                    "full": fold.full,
                    "classes_uniform": fold.classes_uniform,
                    "bounded_folding": fold.holds(),
                    "omega": fold.omega,
                });
                self.emit(j.clone(), || {
                    j.as_object().unwrap().iter().map(|(k, v)| format!("{k:<24} {v}\n")).collect()
                });
                Ok(())
            }
            Cmd::Rational { file, word, nfa, regex } => {
                let p = load(file)?;
                let o = self.oracle(&p)?;
                let w = p.word(word).map_err(|e| Failure::Usage(e.to_string()))?;
                let a = match (nfa, regex) {
                    (Some(path), _) => {
                        let t = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
                        Nfa::from_json(&t, &p.alphabet)
                    }
                    (None, Some(re)) => Nfa::from_regex(re, &p.alphabet),
                    (None, None) => unreachable!("clap requires one"),
                }
                .map_err(|e| Failure::Usage(e.to_string()))?;
                let r = rational_member(&o, &a, &w, self.radius);
                self.emit(r.to_json(&p), || match &r {
                    MembershipResult::Yes { witness, .. } => format!("Yes, witness {}\n", p.fmt_word(witness)),
                    MembershipResult::NoWithinBound { radius } => format!("NoWithinBound (radius {radius})\n"),
                    MembershipResult::Aborted { left, right } => format!("Aborted: {} = {} undecided\n", p.fmt_word(left), p.fmt_word(right)),
                });
                match r {
                    MembershipResult::Aborted { .. } => Err(domain("equality undecided")),
                    _ => Ok(()),
                }
            }
            Cmd::Export { file, format } => {
                let p = load(file)?;
                match format {
                    ExportFormat::Text => print!("{}", p.to_text()),
                    ExportFormat::Json => println!("{}", serde_json::to_string_pretty(&p.to_json()).unwrap()),
                    ExportFormat::Rewriting => {
                        let o = self.oracle(&p)?;
                        let rs = o.system().ok_or_else(|| domain("no complete rewriting system"))?;
                        println!("{}", serde_json::to_string_pretty(&rs.to_json(&p)).unwrap());
                    }
                    ExportFormat::Units => {
                        let pt = self.pieces(&self.oracle(&p)?)?;
                        println!("{}", compute_unit_presentation(&pt).to_text());
                    }
                }
                Ok(())
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Domain(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
