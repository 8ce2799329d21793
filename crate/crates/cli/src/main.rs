//! `qrperm`: exact certificates that quadruples of 4-point permutations do
//! not force quasirandomness.
//!
//! Exit codes: 0 on success, 1 when a verification fails (or a certificate
//! is inconclusive), 2 on usage errors.

mod pipeline;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use num_traits::Zero;
use serde_json::json;

use qrperm_core::certify::{
    alpha_for_signs, certify_auto_n, certify_non_forcing, classify_quadruple,
    enumerate_allone_quadruples, enumerate_zerocombo_quadruples, QuadrupleClass, Verdict,
};
use qrperm_core::exceptional::{
    build_case, emit_witness, solve_case, verify_case_polynomials, verify_lemma_facts, CaseId,
};
use qrperm_core::perm::{enumerate_sk, pattern_density, Permutation};
use qrperm_core::permuton::{PermutonSpec, StepPermuton};
use qrperm_core::perturb::{h_derivatives_at_zero, h_value, PerturbationPoint};
use qrperm_core::rat::{parse_rat, rat_to_f64, rat_to_string, Rat};

use report::{ReportItem, ReportSection, RunReport};

#[derive(Parser)]
#[command(name = "qrperm", version, about = "exact quasirandomness-forcing certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the whole verification pipeline and report every item.
    Reproduce {
        /// Restrict to named sections (enumeration, trichotomy,
        /// certificates, special, exceptional, appendix).
        #[arg(long)]
        only: Vec<String>,
        /// Write the machine-readable report here.
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Monte Carlo trials per sampled frequency (0 disables sampling).
        #[arg(long, default_value_t = 1_000_000)]
        mc_trials: u64,
    },
    /// Exact pattern density in a permutation or a step permuton.
    Density {
        #[arg(long)]
        sigma: String,
        /// Host permutation in one-line notation.
        #[arg(long, conflicts_with = "permuton")]
        perm: Option<String>,
        /// `uniformK` or a JSON file (matrix or mixture form).
        #[arg(long)]
        permuton: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Exact gradient of the deviation function at the origin.
    Gradient {
        #[arg(long)]
        sigma: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        json: bool,
    },
    /// Exact Hessian of the deviation function at the origin.
    Hessian {
        #[arg(long)]
        sigma: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        json: bool,
    },
    /// Build and validate a non-forcing certificate for a quadruple.
    Certify {
        /// Four comma-separated 4-point permutations.
        #[arg(long)]
        quad: String,
        /// Grid size; when omitted, sizes 4..=7 are tried in order.
        #[arg(long)]
        n: Option<usize>,
        /// `++++`, `++--`, or `auto` to infer from the classification.
        #[arg(long, default_value = "auto")]
        signs: String,
        /// Write the full evidence JSON here.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// List the canonical quadruple classes.
    Enumerate {
        /// `all-one` or `zero-combination`.
        #[arg(long)]
        family: String,
        #[arg(long)]
        json: bool,
    },
    /// Verify one of the two special constructions and emit its witness.
    Exceptional {
        #[arg(long = "case")]
        case: usize,
        /// Write the witness permuton JSON here.
        #[arg(long)]
        emit: Option<PathBuf>,
        /// Write the fact-check report JSON here.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        mc_trials: u64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Sample patterns from a step permuton and print the frequency table.
    Sample {
        /// `uniformK` or a JSON file (matrix or mixture form).
        #[arg(long)]
        permuton: String,
        /// Pattern size.
        #[arg(long)]
        m: usize,
        #[arg(long)]
        trials: u64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
    /// Verify that a perturbation point zeroes the deviation functions and
    /// emit the witness permuton.
    WitnessFromZero {
        /// Comma-separated permutations (one-line notation).
        #[arg(long)]
        perms: String,
        /// Grid size k; the point has (k-1)^2 coordinates.
        #[arg(long)]
        k: usize,
        /// Comma-separated rational coordinates `p/q`.
        #[arg(long)]
        x: String,
    },
}

fn main() -> ExitCode {
    // die quietly when stdout is closed early (e.g. piped into head)
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(passed) => {
            if passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Reproduce { only, json, seed, mc_trials } => {
            for s in &only {
                if !pipeline::SECTIONS.contains(&s.as_str()) {
                    anyhow::bail!(
                        "unknown section {s:?}; available: {}",
                        pipeline::SECTIONS.join(", ")
                    );
                }
            }
            let start = Instant::now();
            let sections = pipeline::run_sections(&only, seed, mc_trials);
            let mut report = RunReport::new(
                "reproduce",
                json!({"only": only, "seed": seed, "mc_trials": mc_trials}),
                sections,
            );
            report.wall_ms = start.elapsed().as_millis();
            report.print_human();
            if let Some(path) = json {
                std::fs::write(&path, serde_json::to_string_pretty(&report)?)?;
                println!("report written to {}", path.display());
            }
            Ok(report.passed)
        }
        Command::Density { sigma, perm, permuton, json } => {
            let sigma: Permutation = sigma.parse()?;
            let value = match (perm, permuton) {
                (Some(p), None) => pattern_density(&sigma, &p.parse()?),
                (None, Some(spec)) => load_permuton(&spec)?.density(&sigma),
                _ => anyhow::bail!("provide exactly one of --perm and --permuton"),
            };
            if json {
                println!(
                    "{}",
                    json!({"sigma": sigma.to_string(), "density": rat_to_string(&value),
                           "approx": rat_to_f64(&value)})
                );
            } else {
                println!("{}", rat_to_string(&value));
            }
            Ok(true)
        }
        Command::Gradient { sigma, n, json } => {
            let sigma: Permutation = sigma.parse()?;
            let (grad, _) = h_derivatives_at_zero(&sigma, n);
            if json {
                let entries: Vec<String> = grad.iter().map(rat_to_string).collect();
                println!(
                    "{}",
                    json!({"sigma": sigma.to_string(), "n": n, "gradient": entries})
                );
            } else {
                let entries: Vec<String> = grad.iter().map(rat_to_string).collect();
                println!("{}", entries.join(" "));
            }
            Ok(true)
        }
        Command::Hessian { sigma, n, json } => {
            let sigma: Permutation = sigma.parse()?;
            let (_, hess) = h_derivatives_at_zero(&sigma, n);
            let rows: Vec<Vec<String>> = (0..hess.rows())
                .map(|r| (0..hess.cols()).map(|c| rat_to_string(hess.get(r, c))).collect())
                .collect();
            if json {
                println!(
                    "{}",
                    json!({"sigma": sigma.to_string(), "n": n, "hessian": rows})
                );
            } else {
                for row in rows {
                    println!("{}", row.join(" "));
                }
            }
            Ok(true)
        }
        Command::Certify { quad, n, signs, json } => {
            let parts: Vec<&str> = quad.split(',').collect();
            if parts.len() != 4 {
                anyhow::bail!("--quad needs four comma-separated permutations");
            }
            let quad: [Permutation; 4] = [
                parts[0].parse()?,
                parts[1].parse()?,
                parts[2].parse()?,
                parts[3].parse()?,
            ];
            let alpha = match signs.as_str() {
                "auto" => match classify_quadruple(&quad)? {
                    QuadrupleClass::AllOne => alpha_for_signs([1, 1, 1, 1]),
                    QuadrupleClass::ZeroCombo { plus, minus } => {
                        let order = [&plus[0], &plus[1], &minus[0], &minus[1]];
                        let mut alpha = vec![];
                        for q in &quad {
                            let pos = order.iter().position(|p| *p == q).unwrap();
                            alpha.push(if pos < 2 {
                                qrperm_core::rat::rat(1)
                            } else {
                                qrperm_core::rat::rat(-1)
                            });
                        }
                        alpha
                    }
                    QuadrupleClass::Independent => anyhow::bail!(
                        "the quadruple has independent gradient polynomials; \
                         no dependence coefficients exist (it is handled by \
                         the gradient route, not a Hessian certificate)"
                    ),
                },
                s => {
                    let mut alpha = vec![];
                    for ch in s.chars() {
                        match ch {
                            '+' => alpha.push(qrperm_core::rat::rat(1)),
                            '-' => alpha.push(qrperm_core::rat::rat(-1)),
                            _ => anyhow::bail!("--signs must be +/- characters or auto"),
                        }
                    }
                    if alpha.len() != 4 {
                        anyhow::bail!("--signs needs exactly four characters");
                    }
                    alpha
                }
            };
            let evidence = match n {
                Some(n) => certify_non_forcing(&quad, n, &alpha)?,
                None => certify_auto_n(&quad, &alpha, 4..=7)?,
            };
            println!(
                "verdict: {:?} (n = {}, full inertia {}, restricted {})",
                evidence.verdict, evidence.n, evidence.full_inertia, evidence.restricted_inertia
            );
            if let Some(pair) = &evidence.witness_pair {
                println!(
                    "witness quadratic values: {} and {}",
                    rat_to_string(&pair.value_plus),
                    rat_to_string(&pair.value_minus)
                );
            }
            if let Some(path) = json {
                std::fs::write(&path, serde_json::to_string_pretty(&evidence)?)?;
                println!("evidence written to {}", path.display());
            }
            Ok(evidence.verdict != Verdict::Inconclusive)
        }
        Command::Enumerate { family, json } => {
            match family.as_str() {
                "all-one" => {
                    let e = enumerate_allone_quadruples();
                    if json {
                        let classes: Vec<Vec<String>> = e
                            .classes
                            .iter()
                            .map(|q| q.iter().map(ToString::to_string).collect())
                            .collect();
                        println!(
                            "{}",
                            json!({"latin_squares": e.latin_square_count,
                                   "unordered": e.unordered_count,
                                   "classes": classes})
                        );
                    } else {
                        println!(
                            "{} ordered decompositions, {} unordered, {} classes:",
                            e.latin_square_count,
                            e.unordered_count,
                            e.classes.len()
                        );
                        for (i, q) in e.classes.iter().enumerate() {
                            let names: Vec<String> =
                                q.iter().map(ToString::to_string).collect();
                            println!("{:2}. {}", i + 1, names.join(","));
                        }
                    }
                }
                "zero-combination" => {
                    let classes = enumerate_zerocombo_quadruples();
                    if json {
                        let list: Vec<serde_json::Value> = classes
                            .iter()
                            .map(|c| {
                                json!({
                                    "plus": [c.plus[0].to_string(), c.plus[1].to_string()],
                                    "minus": [c.minus[0].to_string(), c.minus[1].to_string()],
                                })
                            })
                            .collect();
                        println!("{}", json!({"classes": list}));
                    } else {
                        println!("{} classes:", classes.len());
                        for (i, c) in classes.iter().enumerate() {
                            println!(
                                "{:2}. {},{} | {},{}",
                                i + 1,
                                c.plus[0],
                                c.plus[1],
                                c.minus[0],
                                c.minus[1]
                            );
                        }
                    }
                }
                other => anyhow::bail!("unknown family {other:?}"),
            }
            Ok(true)
        }
        Command::Exceptional { case, emit, report, mc_trials, seed } => {
            let id = CaseId::from_index(case)?;
            let case = build_case(id)?;
            let mut checks = verify_case_polynomials(&case)?;
            checks.extend(verify_lemma_facts(&case)?);
            let solved = solve_case(&case)?;
            let bundle = emit_witness(&case, &solved)?;
            let mut items: Vec<ReportItem> = checks
                .iter()
                .map(|c| ReportItem::new(c.name.clone(), c.passed, "holds", c.detail.clone()))
                .collect();
            let tol = parse_rat("1/1000000000000").unwrap();
            items.push(ReportItem::new(
                "solved residuals",
                solved.residual_g1 <= tol && solved.residual_g2 <= tol,
                "|g1 - 1/24|, |g2 - 1/24| <= 1e-12",
                format!(
                    "{} and {}",
                    rat_to_string(&solved.residual_g1),
                    rat_to_string(&solved.residual_g2)
                ),
            ));
            if mc_trials > 0 {
                let counts =
                    solved.permuton.mc_counts(&case.quadruple, mc_trials, seed, false);
                let target = 1.0 / 24.0;
                let se = (target * (1.0 - target) / mc_trials as f64).sqrt();
                for (pat, count) in case.quadruple.iter().zip(counts) {
                    let freq = count as f64 / mc_trials as f64;
                    items.push(ReportItem::new(
                        format!("sampled frequency of {pat}"),
                        (freq - target).abs() <= 5.0 * se,
                        format!("1/24 within {:.2e}", 5.0 * se),
                        format!("{freq:.6}"),
                    ));
                }
            }
            let section = ReportSection::new(format!("exceptional case {}", id.index()), items);
            let run_report = RunReport::new(
                "exceptional",
                json!({"case": id.index(), "mc_trials": mc_trials, "seed": seed}),
                vec![section],
            );
            run_report.print_human();
            if let Some(path) = report {
                std::fs::write(&path, serde_json::to_string_pretty(&run_report)?)?;
                println!("report written to {}", path.display());
            }
            if let Some(path) = emit {
                let witness = json!({
                    "case": id.index(),
                    "permuton": PermutonSpec::from_permuton(&bundle.permuton),
                    "enclosure": {
                        "t": [rat_to_string(&solved.t_lo), rat_to_string(&solved.t_hi)],
                        "s": [rat_to_string(&solved.s_lo), rat_to_string(&solved.s_hi)],
                    },
                    "midpoint": {
                        "s": rat_to_string(&solved.s_mid),
                        "t": rat_to_string(&solved.t_mid),
                    },
                    "residuals": {
                        "g1": rat_to_string(&solved.residual_g1),
                        "g2": rat_to_string(&solved.residual_g2),
                    },
                    "curve_lipschitz_bound": rat_to_string(&solved.lipschitz_bound),
                    "densities": bundle.patterns.iter().zip(&bundle.densities).map(
                        |(p, d)| json!({"pattern": p, "density": d})
                    ).collect::<Vec<_>>(),
                    "nonuniform_cell": bundle.nonuniform_cell,
                    "nonuniform_mass": rat_to_string(&bundle.nonuniform_mass),
                    "note": bundle.enclosure_note,
                });
                std::fs::write(&path, serde_json::to_string_pretty(&witness)?)?;
                println!("witness written to {}", path.display());
            }
            Ok(run_report.passed)
        }
        Command::Sample { permuton, m, trials, seed, json } => {
            let p = load_permuton(&permuton)?;
            if m == 0 || m > 4 {
                anyhow::bail!("--m must be between 1 and 4");
            }
            let patterns = enumerate_sk(m)?;
            let counts = p.mc_counts(&patterns, trials, seed, false);
            let uniform = 1.0 / patterns.len() as f64;
            let se = (uniform * (1.0 - uniform) / trials as f64).sqrt();
            if json {
                let table: Vec<serde_json::Value> = patterns
                    .iter()
                    .zip(&counts)
                    .map(|(p, &c)| {
                        json!({"pattern": p.to_string(), "count": c,
                               "frequency": c as f64 / trials as f64})
                    })
                    .collect();
                println!(
                    "{}",
                    json!({"m": m, "trials": trials, "seed": seed,
                           "uniform": uniform, "stderr_uniform": se, "table": table})
                );
            } else {
                println!("pattern frequency (uniform {uniform:.6}, se {se:.2e})");
                for (p, c) in patterns.iter().zip(&counts) {
                    println!("{p}  {:.6}  ({c} / {trials})", *c as f64 / trials as f64);
                }
            }
            Ok(true)
        }
        Command::WitnessFromZero { perms, k, x } => {
            let perms: Vec<Permutation> = perms
                .split(';')
                .map(|s| s.trim().parse())
                .collect::<qrperm_core::Result<_>>()?;
            let coords: Vec<Rat> = x
                .split(',')
                .map(|s| parse_rat(s.trim()))
                .collect::<qrperm_core::Result<_>>()?;
            let point = PerturbationPoint::new(k, coords)?;
            match qrperm_core::certify::witness_from_zero(&perms, &point) {
                Ok(w) => {
                    println!(
                        "witness verified: first perturbed coordinate {} (cell mass differs from uniform)",
                        w.nonuniform_index
                    );
                    for (p, d) in perms.iter().zip(&w.densities) {
                        println!("d({p}) = {}", rat_to_string(d));
                    }
                    Ok(true)
                }
                Err(e) => {
                    // deviation values are verification results, not usage errors
                    eprintln!("verification failed: {e}");
                    for p in &perms {
                        let h = h_value(p, &point);
                        if !h.is_zero() {
                            eprintln!("h_{p} = {}", rat_to_string(&h));
                        }
                    }
                    Ok(false)
                }
            }
        }
    }
}

fn load_permuton(spec: &str) -> anyhow::Result<StepPermuton> {
    if let Some(k) = spec.strip_prefix("uniform") {
        let k: usize = k.parse().map_err(|_| {
            anyhow::anyhow!("bad uniform permuton spec {spec:?}; use e.g. uniform4")
        })?;
        if k == 0 || k > 64 {
            anyhow::bail!("uniform grid size must be in 1..=64");
        }
        return Ok(StepPermuton::uniform(k));
    }
    let text = std::fs::read_to_string(spec)
        .map_err(|e| anyhow::anyhow!("cannot read permuton file {spec:?}: {e}"))?;
    let parsed: PermutonSpec = serde_json::from_str(&text)?;
    Ok(parsed.build()?)
}
