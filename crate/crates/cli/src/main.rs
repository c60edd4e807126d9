//! `strongdiv`: command line front end for the Kisin / strongly divisible
//! module library.
//!
//! Exit codes: 0 every checked claim passed, 1 a claim failed, 2 a claim
//! was indeterminate at the working precision, 3 input or usage error.
//! Reports go to stdout, diagnostics to stderr.

use strongdiv_cli::{format, report_out};

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use format::{parse_module_file, render_ctx_only, render_module_file, ModuleFile};
use report_out::{exit_code, render, to_human, to_json};
use strongdiv_core::breuil::{
    check_exact_breuil, check_monodromy, check_sdm_axioms, from_kisin, morphism_from_kisin,
    splice, tensor_breuil, tor1_with_s, BreuilMorphism,
};
use strongdiv_core::kisin::{
    check_exact_sequence, check_height, dual, hodge_tate_weights, tensor, twist_module,
    KisinMorphism, SigmaMat,
};
use strongdiv_core::report::{Claim, Report, Verdict};
use strongdiv_core::scenario::{
    run_counterexample, run_exactness_suite, run_key_lemma_suite, run_twist_suite,
    standard_context, DEFAULT_SEED,
};
use strongdiv_core::series::{EisensteinPoly, RingContext, SElem};

#[derive(Parser)]
#[command(name = "strongdiv", version, about = "Kisin and strongly divisible module computations at finite precision")]
struct Cli {
    /// Emit the report as JSON instead of the human-readable form.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Validate context parameters and print a module file header.
    Ctx {
        #[command(subcommand)]
        cmd: CtxCmd,
    },
    /// Operations on Kisin modules from a module file.
    Kisin {
        #[command(subcommand)]
        cmd: KisinCmd,
    },
    /// Exactness checks on chains of morphisms.
    Seq {
        #[command(subcommand)]
        cmd: SeqCmd,
    },
    /// Operations on strongly divisible modules.
    Breuil {
        #[command(subcommand)]
        cmd: BreuilCmd,
    },
    /// Canned end-to-end computations.
    Paper {
        #[command(subcommand)]
        cmd: PaperCmd,
    },
}

#[derive(Subcommand)]
enum CtxCmd {
    New {
        #[arg(long)]
        p: u64,
        #[arg(long = "N")]
        n: u32,
        #[arg(long = "M")]
        m: usize,
        /// Eisenstein coefficients, constant term first; default u^(p-1)+p.
        #[arg(long = "E")]
        e: Option<String>,
    },
}

#[derive(Subcommand)]
enum KisinCmd {
    /// Check height <= r; exit 1 with the weight witness on failure.
    Height {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        name: String,
        #[arg(long)]
        r: u32,
    },
    /// Tensor product of two named modules, printed as a module file.
    Tensor {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long, default_value = "out")]
        out_name: String,
    },
    /// The twist module at weight r, printed as a module file.
    Twist {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        r: u32,
        #[arg(long, default_value = "out")]
        out_name: String,
    },
    /// Hodge-Tate weights of a named module.
    Weights {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        name: String,
    },
    /// Dual module, printed as a module file.
    Dual {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        name: String,
        #[arg(long, default_value = "out")]
        out_name: String,
    },
}

#[derive(Subcommand)]
enum SeqCmd {
    /// Exactness report for a chain of named morphisms.
    Check {
        #[arg(long)]
        file: PathBuf,
        /// Comma-separated morphism names, left to right.
        #[arg(long)]
        names: String,
    },
}

#[derive(Subcommand)]
enum BreuilCmd {
    /// Base change a named Kisin module to a strongly divisible module.
    FromKisin {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        name: String,
        #[arg(long)]
        r: u32,
        /// Write the resulting record as a module file here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Strong-divisibility axioms of a named breuil record.
    Axioms {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        name: String,
    },
    /// Monodromy axioms of a named breuil record (zero candidate if the
    /// file carries no nmat lines).
    Monodromy {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        name: String,
    },
    /// Transport a chain of Kisin morphisms at weight r and check
    /// exactness at both levels.
    Exact {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        names: String,
        #[arg(long)]
        r: u32,
    },
    /// Tensor product of two breuil records, with the filtration probe.
    Tensor {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Splice two transported short exact sequences into a 2-extension
    /// and check the resulting complex.
    Splice {
        #[arg(long)]
        file: PathBuf,
        /// Comma-separated pair of morphism names for the first extension.
        #[arg(long)]
        first: String,
        /// Comma-separated pair of morphism names for the second extension.
        #[arg(long)]
        second: String,
        #[arg(long)]
        r: u32,
    },
}

#[derive(Subcommand)]
enum PaperCmd {
    /// The rank-2 example: left exact, tail image ideal (p, u), cokernel
    /// of cardinality p, failure of exactness after base change.
    Counterexample {
        #[arg(long)]
        p: u64,
        #[arg(long = "N")]
        n: u32,
        #[arg(long = "M")]
        m: usize,
    },
    /// Directed and randomized checks of the ideal lemma.
    KeyLemma {
        #[arg(long)]
        p: u64,
        #[arg(long = "N")]
        n: u32,
        #[arg(long = "M")]
        m: usize,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Twist identities for r = 1 .. r_max.
    Twists {
        #[arg(long)]
        p: u64,
        #[arg(long = "N")]
        n: u32,
        #[arg(long = "M")]
        m: usize,
        #[arg(long)]
        r_max: u32,
    },
    /// Randomized exactness transport, tensor preservation and splicing.
    Exactness {
        #[arg(long)]
        p: u64,
        #[arg(long = "N")]
        n: u32,
        #[arg(long = "M")]
        m: usize,
        #[arg(long)]
        r: u32,
        #[arg(long, default_value_t = 30)]
        trials: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Tor_1(S, Sigma/(p, u^p)) from the Koszul resolution, with the
    /// explicit nonzero class.
    Tor {
        #[arg(long)]
        p: u64,
        #[arg(long = "N")]
        n: u32,
        #[arg(long = "M")]
        m: usize,
    },
}

struct CliError(String);

impl<E: std::fmt::Display> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError(format!("{}", e))
    }
}

fn load(path: &PathBuf) -> Result<ModuleFile, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError(format!("{}: {}", path.display(), e)))?;
    parse_module_file(&text).map_err(|e| CliError(format!("{}: {}", path.display(), e)))
}

fn resolve_seed(flag: Option<u64>) -> u64 {
    flag.or_else(|| std::env::var("STRONGDIV_SEED").ok().and_then(|s| s.parse().ok()))
        .unwrap_or(DEFAULT_SEED)
}

fn emit(report: &Report, json: bool, start: Instant) -> u8 {
    let rendered = render(report, start.elapsed().as_millis() as u64);
    if json {
        print!("{}", to_json(&rendered));
    } else {
        print!("{}", to_human(&rendered));
    }
    exit_code(report)
}

fn get_kisin<'a>(
    f: &'a ModuleFile,
    name: &str,
) -> Result<&'a strongdiv_core::KisinModule, CliError> {
    f.kisin.get(name).ok_or_else(|| CliError(format!("no Kisin module named `{}`", name)))
}

fn get_breuil<'a>(f: &'a ModuleFile, name: &str) -> Result<&'a format::BreuilRecord, CliError> {
    f.breuil.get(name).ok_or_else(|| CliError(format!("no breuil record named `{}`", name)))
}

/// Named morphisms in chain order; verifies composability by name.
fn get_chain<'a>(f: &'a ModuleFile, names: &str) -> Result<Vec<&'a format::MorphismRecord>, CliError> {
    let mut out = Vec::new();
    for name in names.split(',') {
        let rec = f
            .morphisms
            .get(name)
            .ok_or_else(|| CliError(format!("no morphism named `{}`", name)))?;
        if let Some(prev) = out.last() {
            let prev: &&format::MorphismRecord = prev;
            if prev.dst != rec.src {
                return Err(CliError(format!(
                    "morphisms do not compose: `{}` ends at `{}` but `{}` starts at `{}`",
                    prev_name(f, prev),
                    prev.dst,
                    name,
                    rec.src
                )));
            }
        }
        out.push(rec);
    }
    if out.is_empty() {
        return Err(CliError("empty morphism chain".into()));
    }
    Ok(out)
}

fn prev_name<'a>(f: &'a ModuleFile, rec: &format::MorphismRecord) -> &'a str {
    f.morphisms
        .iter()
        .find(|(_, r)| std::ptr::eq(*r, rec))
        .map(|(n, _)| n.as_str())
        .unwrap_or("?")
}

fn ctx_string(ctx: &RingContext) -> String {
    format!("p={} N={} M={}", ctx.p(), ctx.precision(), ctx.trunc())
}

fn sequence_report(title: &str, ctx: &RingContext, rep: &strongdiv_core::kisin::SequenceReport) -> Report {
    let mut out = Report::new(title, ctx_string(ctx));
    for (k, v) in rep.morphisms_valid.iter().enumerate() {
        out.push(Claim::new(
            &format!("morphism-{}-valid", k),
            "Frobenius compatibility",
            Verdict::from_bool(*v),
        ));
    }
    out.push(Claim::new("head-injective", "kernel modulo boundary junk", Verdict::from_bool(rep.head_injective)));
    for (k, v) in rep.composites_zero.iter().enumerate() {
        out.push(Claim::new(&format!("composite-{}-zero", k), "matrix product", Verdict::from_bool(*v)));
    }
    for (k, (&e, &s)) in rep.junctions_exact.iter().zip(rep.junctions_strict.iter()).enumerate() {
        let verdict = if s {
            Verdict::Pass
        } else if e {
            Verdict::Indeterminate
        } else {
            Verdict::Fail
        };
        out.push(Claim::new(&format!("junction-{}-exact", k), "ker = im as spans", verdict));
    }
    let mut tail = Claim::new(
        "tail-surjective",
        "image span equals the target",
        Verdict::from_bool(rep.tail_surjective),
    );
    if let Some(w) = &rep.image_ideal {
        tail = tail.with_witness(format!("image ideal verdict {:?}", w.verdict));
    }
    out.push(tail);
    out
}

fn breuil_sequence_report(
    title: &str,
    ctx: &RingContext,
    rep: &strongdiv_core::breuil::BreuilSequenceReport,
) -> Report {
    let mut out = Report::new(title, ctx_string(ctx));
    for (k, v) in rep.morphisms_valid.iter().enumerate() {
        out.push(Claim::new(
            &format!("morphism-{}-valid", k),
            "Fil and phi_r compatibility",
            Verdict::from_bool(*v),
        ));
    }
    out.push(Claim::new("head-injective", "kernel modulo boundary junk", Verdict::from_bool(rep.head_injective)));
    for (k, v) in rep.composites_zero.iter().enumerate() {
        out.push(Claim::new(&format!("composite-{}-zero", k), "matrix product", Verdict::from_bool(*v)));
    }
    for (k, (&e, &s)) in rep.junctions_exact.iter().zip(rep.junctions_strict.iter()).enumerate() {
        let verdict = if s {
            Verdict::Pass
        } else if e {
            Verdict::Indeterminate
        } else {
            Verdict::Fail
        };
        out.push(Claim::new(&format!("junction-{}-exact", k), "ker = im as spans", verdict));
    }
    out.push(Claim::new(
        "tail-surjective",
        "image span equals the target",
        Verdict::from_bool(rep.tail_surjective),
    ));
    out.push(Claim::new(
        "fil-head-injective",
        "filtration-level kernel",
        Verdict::from_bool(rep.fil_head_injective),
    ));
    for (k, v) in rep.fil_junctions_exact.iter().enumerate() {
        out.push(Claim::new(
            &format!("fil-junction-{}-exact", k),
            "ker cap Fil = image of Fil",
            Verdict::from_bool(*v),
        ));
    }
    out.push(Claim::new(
        "fil-tail-surjective",
        "image of Fil equals the target Fil",
        Verdict::from_bool(rep.fil_tail_surjective),
    ));
    out
}

fn transport_chain(
    ctx: &RingContext,
    chain: &[&format::MorphismRecord],
    r: u32,
) -> Result<Vec<BreuilMorphism>, CliError> {
    let mut objects = Vec::with_capacity(chain.len() + 1);
    objects.push(from_kisin(ctx, &chain[0].f.source, r)?);
    for rec in chain {
        objects.push(from_kisin(ctx, &rec.f.target, r)?);
    }
    let mut out = Vec::with_capacity(chain.len());
    for (k, rec) in chain.iter().enumerate() {
        out.push(morphism_from_kisin(ctx, &rec.f, objects[k].clone(), objects[k + 1].clone())?);
    }
    Ok(out)
}

fn single_module_file(
    ctx: &RingContext,
    eis_coeffs: &[i64],
    name: &str,
    m: strongdiv_core::KisinModule,
) -> String {
    let mut f = ModuleFile {
        ctx: ctx.clone(),
        eis_coeffs: eis_coeffs.to_vec(),
        kisin: Default::default(),
        morphisms: Default::default(),
        breuil: Default::default(),
    };
    f.kisin.insert(name.to_string(), m);
    render_module_file(&f)
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let start = Instant::now();
    match cli.cmd {
        Cmd::Ctx { cmd: CtxCmd::New { p, n, m, e } } => {
            let coeffs = match e {
                Some(s) => s
                    .split(',')
                    .map(|t| t.trim().parse::<i64>().map_err(|_| CliError(format!("invalid coefficient `{}`", t))))
                    .collect::<Result<Vec<i64>, _>>()?,
                None => EisensteinPoly::standard(p)?.coeffs().to_vec(),
            };
            let eis = EisensteinPoly::new(coeffs.clone(), p)?;
            let ctx = RingContext::new(p, n, m, eis)?;
            print!("{}", render_ctx_only(&ctx, &coeffs));
            Ok(0)
        }
        Cmd::Kisin { cmd } => match cmd {
            KisinCmd::Height { file, name, r } => {
                let f = load(&file)?;
                let m = get_kisin(&f, &name)?;
                let ok = check_height(&f.ctx, m, r)?;
                let mut rep = Report::new("height check", ctx_string(&f.ctx));
                let mut claim = Claim::new(
                    &format!("height-le-{}", r),
                    "E^r M inside the span of the Frobenius image",
                    Verdict::from_bool(ok),
                );
                if !ok {
                    if let Ok(w) = hodge_tate_weights(&f.ctx, m) {
                        claim = claim.with_witness(format!("weights {:?}", w));
                    }
                }
                rep.push(claim);
                Ok(emit(&rep, cli.json, start))
            }
            KisinCmd::Tensor { file, a, b, out_name } => {
                let f = load(&file)?;
                let t = tensor(&f.ctx, get_kisin(&f, &a)?, get_kisin(&f, &b)?)?;
                print!("{}", single_module_file(&f.ctx, &f.eis_coeffs, &out_name, t));
                Ok(0)
            }
            KisinCmd::Twist { file, r, out_name } => {
                let f = load(&file)?;
                let t = twist_module(&f.ctx, r)?;
                print!("{}", single_module_file(&f.ctx, &f.eis_coeffs, &out_name, t));
                Ok(0)
            }
            KisinCmd::Weights { file, name } => {
                let f = load(&file)?;
                let w = hodge_tate_weights(&f.ctx, get_kisin(&f, &name)?)?;
                let mut rep = Report::new("hodge-tate weights", ctx_string(&f.ctx));
                rep.push(
                    Claim::new("weights-computed", "E-adic invariant factors", Verdict::Pass)
                        .with_witness(format!("{:?}", w)),
                );
                Ok(emit(&rep, cli.json, start))
            }
            KisinCmd::Dual { file, name, out_name } => {
                let f = load(&file)?;
                let d = dual(&f.ctx, get_kisin(&f, &name)?)?;
                print!("{}", single_module_file(&f.ctx, &f.eis_coeffs, &out_name, d));
                Ok(0)
            }
        },
        Cmd::Seq { cmd: SeqCmd::Check { file, names } } => {
            let f = load(&file)?;
            let chain = get_chain(&f, &names)?;
            let morphs: Vec<KisinMorphism> = chain.iter().map(|r| r.f.clone()).collect();
            let rep = check_exact_sequence(&f.ctx, &morphs)?;
            Ok(emit(&sequence_report("sequence check", &f.ctx, &rep), cli.json, start))
        }
        Cmd::Breuil { cmd } => match cmd {
            BreuilCmd::FromKisin { file, name, r, out } => {
                let f = load(&file)?;
                let b = from_kisin(&f.ctx, get_kisin(&f, &name)?, r)?;
                let mut rep = Report::new("base change", ctx_string(&f.ctx));
                rep.push(
                    Claim::new("base-change-constructed", "height gate and filtration preimage", Verdict::Pass)
                        .with_witness(format!(
                            "rank={} weight={} fil_rows={}",
                            b.rank,
                            b.weight,
                            b.fil.rank_rows()
                        )),
                );
                if let Some(path) = out {
                    let mut mf = ModuleFile {
                        ctx: f.ctx.clone(),
                        eis_coeffs: f.eis_coeffs.clone(),
                        kisin: Default::default(),
                        morphisms: Default::default(),
                        breuil: Default::default(),
                    };
                    mf.kisin.insert(name.clone(), get_kisin(&f, &name)?.clone());
                    mf.breuil.insert(
                        format!("{}-b", name),
                        format::BreuilRecord { from: name.clone(), r, module: b },
                    );
                    std::fs::write(&path, render_module_file(&mf))
                        .map_err(|e| CliError(format!("{}: {}", path.display(), e)))?;
                }
                Ok(emit(&rep, cli.json, start))
            }
            BreuilCmd::Axioms { file, name } => {
                let f = load(&file)?;
                let rec = get_breuil(&f, &name)?;
                let rep = check_sdm_axioms(&f.ctx, &rec.module)?;
                Ok(emit(&rep, cli.json, start))
            }
            BreuilCmd::Monodromy { file, name } => {
                let f = load(&file)?;
                let rec = get_breuil(&f, &name)?;
                let module = if rec.module.monodromy.is_some() {
                    rec.module.clone()
                } else {
                    let zero = strongdiv_core::breuil::SMat::zero(&f.ctx, rec.module.rank, rec.module.rank);
                    rec.module.clone().with_monodromy(zero)
                };
                let rep = check_monodromy(&f.ctx, &module)?;
                Ok(emit(&rep, cli.json, start))
            }
            BreuilCmd::Exact { file, names, r } => {
                let f = load(&file)?;
                let chain = get_chain(&f, &names)?;
                let morphs = transport_chain(&f.ctx, &chain, r)?;
                let rep = check_exact_breuil(&f.ctx, &morphs)?;
                Ok(emit(&breuil_sequence_report("breuil exactness", &f.ctx, &rep), cli.json, start))
            }
            BreuilCmd::Tensor { file, a, b, out } => {
                let f = load(&file)?;
                let ra = get_breuil(&f, &a)?;
                let rb = get_breuil(&f, &b)?;
                let (t, probe) = tensor_breuil(&f.ctx, &ra.module, &rb.module)?;
                let mut rep = Report::new("breuil tensor", ctx_string(&f.ctx));
                rep.push(
                    Claim::new(
                        "fil-tensor-span",
                        "computed Fil equals the span of Fil x Fil products",
                        Verdict::from_bool(probe),
                    )
                    .with_witness(format!("rank={} weight={}", t.rank, t.weight)),
                );
                if let Some(path) = out {
                    let prov = t
                        .provenance
                        .clone()
                        .ok_or_else(|| CliError("tensor lost provenance".into()))?;
                    let weight = t.weight;
                    let mut mf = ModuleFile {
                        ctx: f.ctx.clone(),
                        eis_coeffs: f.eis_coeffs.clone(),
                        kisin: Default::default(),
                        morphisms: Default::default(),
                        breuil: Default::default(),
                    };
                    mf.kisin.insert("out".into(), prov);
                    mf.breuil.insert(
                        "out-b".into(),
                        format::BreuilRecord { from: "out".into(), r: weight, module: t },
                    );
                    std::fs::write(&path, render_module_file(&mf))
                        .map_err(|e| CliError(format!("{}: {}", path.display(), e)))?;
                }
                Ok(emit(&rep, cli.json, start))
            }
            BreuilCmd::Splice { file, first, second, r } => {
                let f = load(&file)?;
                let c1 = get_chain(&f, &first)?;
                let c2 = get_chain(&f, &second)?;
                if c1.len() != 2 || c2.len() != 2 {
                    return Err(CliError("each extension must be a chain of two morphisms".into()));
                }
                let t1 = transport_chain(&f.ctx, &c1, r)?;
                let t2 = transport_chain(&f.ctx, &c2, r)?;
                let spliced = splice(&f.ctx, &t1, &t2)?;
                let rep = check_exact_breuil(&f.ctx, &spliced)?;
                Ok(emit(&breuil_sequence_report("spliced 2-extension", &f.ctx, &rep), cli.json, start))
            }
        },
        Cmd::Paper { cmd } => match cmd {
            PaperCmd::Counterexample { p, n, m } => {
                let rep = run_counterexample(p, n, m)?;
                Ok(emit(&rep, cli.json, start))
            }
            PaperCmd::KeyLemma { p, n, m, trials, seed } => {
                let rep = run_key_lemma_suite(p, n, m, trials, resolve_seed(seed))?;
                Ok(emit(&rep, cli.json, start))
            }
            PaperCmd::Twists { p, n, m, r_max } => {
                let rep = run_twist_suite(p, n, m, r_max)?;
                Ok(emit(&rep, cli.json, start))
            }
            PaperCmd::Exactness { p, n, m, r, trials, seed } => {
                let rep = run_exactness_suite(p, n, m, r, trials, resolve_seed(seed))?;
                Ok(emit(&rep, cli.json, start))
            }
            PaperCmd::Tor { p, n, m } => {
                let ctx = standard_context(p, n, m)?;
                let e = ctx.eis().degree();
                let ep = e * p as usize;
                if m <= ep {
                    return Err(CliError("need truncation M > e*p for the witness class".into()));
                }
                let pp = p as i64;
                let up = ctx.sigma_u_pow(p as usize);
                // Koszul resolution of Sigma/(p, u^p)
                let d1 = SigmaMat::new(1, 2, vec![ctx.sigma_poly(&[pp]), up.clone()])?;
                let d2 = SigmaMat::new(2, 1, vec![up, ctx.sigma_neg(&ctx.sigma_poly(&[pp]))])?;
                let tor = tor1_with_s(&ctx, &d1, &d2)?;
                let mut rep = Report::new("tor obstruction", ctx_string(&ctx));
                rep.push(
                    Claim::new(
                        "tor1-nonzero",
                        "homology of the base-changed Koszul complex",
                        Verdict::from_bool(tor.homology.cardinality_log_p() > 0),
                    )
                    .with_witness(format!("log_p |Tor_1| = {}", tor.homology.cardinality_log_p())),
                );
                // cycle (-(p-1)! b_ep, u^(ep-p)): p * (p-1)! b_ep = embed(u^ep)
                let chain = ctx.chain();
                let mut fact = 1u64;
                for t in 2..p {
                    fact = chain.mul(fact, chain.reduce(t));
                }
                let mut a = SElem { coeffs: vec![0; m], prec: n };
                a.coeffs[ep] = fact;
                let a = ctx.s_neg(&a);
                let b = ctx.embed_sigma(&ctx.sigma_u_pow(ep - p as usize))?;
                let v = strongdiv_core::breuil::flatten_s_vec(&ctx, &[a, b], n);
                rep.push(Claim::new(
                    "witness-class-nonzero",
                    "explicit cycle not in the boundary span",
                    Verdict::from_bool(tor.class_is_nonzero(&v)?),
                ));
                Ok(emit(&rep, cli.json, start))
            }
        },
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{}", e);
                return ExitCode::from(0);
            }
            eprintln!("{}", e);
            return ExitCode::from(3);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(CliError(msg)) => {
            eprintln!("error: {}", msg);
            ExitCode::from(3)
        }
    }
}
