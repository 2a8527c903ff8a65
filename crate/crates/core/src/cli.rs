//! Command-line front end. Exit status: 0 success, 1 a computed failing
//! verdict (or the report could not be written), 2 could not compute.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::algebra::{default_data_dir, first_leibniz_failure, leibniz_residual, lower_central_series, AlgebraTable, Catalog, DataSet};
use crate::arith::{parse_binding, parse_expr, Bindings, Param, RatExpr, Scalar};
use crate::compat::{check_pair_over, compat_scan, default_samples, load_claims, COMBINATION_SEED};
use crate::error::{Error, Result};
use crate::operators::{audit_families, build_system, dimension_report, load_families, OperatorFamily, OperatorKind, KIND_SLUGS};
use crate::oracle::{coverage, coverage_sweep, dual_path_check, SweepConfig, DEFAULT_BUDGET, MEMBERSHIP_BUDGET};
use crate::report::{self, binding_text, emit, Format, Report};

/// Family files shipped under `<data>/families/`.
pub const FAMILY_FILES: [&str; 4] = ["rb.json", "nijenhuis.json", "reynolds.json", "averaging.json"];

const GRAMMAR: &str = "expressions use integers, quotients such as 3/4, the unit i, parameter names, + - * / ^ and parentheses";

#[derive(Debug, Parser)]
#[command(name = "leibniz", version, about = "Exact computations with Leibniz algebras given by structure constants and their Rota-type operators")]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, global = true, default_value = "text")]
    pub format: Format,
    /// Write the report to this file (atomically) instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Directory holding catalog.json, errata.json and families/ (default: $LEIBNIZ_DATA_DIR or the shipped data).
    #[arg(long, global = true)]
    pub data_dir: Option<PathBuf>,
    /// Worker threads for the parallel commands.
    #[arg(long, global = true)]
    pub shards: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Inspect the algebra catalog.
    #[command(subcommand)]
    Catalog(CatalogCommand),
    /// Check the Leibniz identity on catalog algebras at each sample parameter value.
    CheckLeibniz {
        /// Algebras to check (default: all).
        names: Vec<String>,
        #[command(flatten)]
        params: ParamArgs,
        /// Use the tables exactly as transcribed, before errata readings.
        #[arg(long)]
        literal: bool,
    },
    /// Dimensions of the lower central series.
    Lcs {
        /// Algebras to check (default: all).
        names: Vec<String>,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Print the polynomial system defining an operator kind on an algebra.
    Equations {
        algebra: String,
        #[command(flatten)]
        op: OpArgs,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Verify operator family files against the catalog.
    Verify {
        /// Family files, resolved against the working directory and then the data directory.
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Also check each Rota-Baxter chart with the weight left symbolic.
        #[arg(long)]
        symbolic_weight: bool,
        /// Verify against the tables as transcribed, before errata readings.
        #[arg(long)]
        literal: bool,
    },
    /// Chart parameter counts of the verified families against the claimed ranges.
    DimReport {
        /// Operator kind: rota-baxter (rb), nijenhuis, reynolds or averaging.
        #[arg(long = "op")]
        kind: String,
    },
    /// Enumerate all operators of one kind over F_p and match them against the verified charts.
    Enumerate {
        algebra: String,
        #[command(flatten)]
        op: OpArgs,
        #[command(flatten)]
        field: FieldArgs,
        #[command(flatten)]
        params: ParamArgs,
        /// Also evaluate the compiled system and compare with the direct evaluation.
        #[arg(long)]
        dual: bool,
    },
    /// Coverage of every catalog algebra at every sample parameter value.
    Coverage {
        /// Operator kinds (default: all four, Rota-Baxter at weight 0).
        #[arg(long = "op")]
        kinds: Vec<String>,
        #[command(flatten)]
        field: FieldArgs,
    },
    /// Check whether two brackets are compatible.
    Compat {
        first: String,
        second: String,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Check every pair of catalog algebras and compare with the claimed list.
    CompatScan {
        /// Sample values for the algebra parameters, as NAME=V1,V2,...
        #[arg(long)]
        params: Option<String>,
        /// Claimed pairs (default: <data>/compat_claims.json).
        #[arg(long)]
        claims: Option<PathBuf>,
        /// Random (λ1, λ2) combinations tried per compatible pair.
        #[arg(long, default_value_t = 50)]
        trials: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum CatalogCommand {
    /// Names, dimensions and parameters.
    List {
        #[arg(long)]
        literal: bool,
    },
    /// Structure constants of one algebra.
    Show {
        name: String,
        #[arg(long)]
        literal: bool,
    },
}

#[derive(Debug, Args)]
pub struct ParamArgs {
    /// Fix an algebra parameter, as NAME=EXPR (repeatable).
    #[arg(long = "param", value_name = "NAME=EXPR", value_parser = binding_arg)]
    pub param: Vec<(Param, RatExpr)>,
}

#[derive(Debug, Args)]
pub struct OpArgs {
    /// Operator kind: rota-baxter (rb), nijenhuis, reynolds or averaging.
    #[arg(long = "op")]
    pub kind: String,
    /// Rota-Baxter weight (default 0).
    #[arg(long, value_name = "EXPR", value_parser = expr_arg, allow_hyphen_values = true)]
    pub weight: Option<RatExpr>,
}

#[derive(Debug, Args)]
pub struct FieldArgs {
    /// Prime p of the field F_p.
    #[arg(long, default_value_t = 2)]
    pub field: u32,
    /// Largest number of matrices to enumerate.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    pub budget: u128,
    /// List at most this many uncovered solutions per run (default: all).
    #[arg(long)]
    pub cap: Option<usize>,
}

fn binding_arg(s: &str) -> std::result::Result<(Param, RatExpr), String> {
    parse_binding(s).map_err(|e| format!("{e}; expected NAME=EXPR, where {GRAMMAR}"))
}

fn expr_arg(s: &str) -> std::result::Result<RatExpr, String> {
    parse_expr(s).map_err(|e| format!("{e}; {GRAMMAR}"))
}

impl OpArgs {
    fn kind(&self) -> Result<OperatorKind> {
        OperatorKind::parse(&self.kind, self.weight.clone())
    }
}

impl ParamArgs {
    fn bindings(&self) -> Bindings {
        self.param.iter().cloned().collect()
    }
}

/// A report plus whether the verdict it carries is a success.
pub struct Outcome {
    pub report: Report,
    pub ok: bool,
}

impl Outcome {
    fn ok(report: Report) -> Self {
        Outcome { report, ok: true }
    }
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(k) = cli.shards {
        pool = pool.num_threads(k);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    match pool.install(|| execute(&cli)) {
        Ok(out) => match emit(&out.report, cli.format, cli.output.as_deref()) {
            Ok(()) => i32::from(!out.ok),
            Err(e) => {
                eprintln!("error: {e}");
                1
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

pub fn execute(cli: &Cli) -> Result<Outcome> {
    let dir = cli.data_dir.clone().unwrap_or_else(default_data_dir);
    let data = DataSet::load(&dir)?;
    match &cli.command {
        Command::Catalog(CatalogCommand::List { literal }) => Ok(Outcome::ok(catalog_list(&data, *literal))),
        Command::Catalog(CatalogCommand::Show { name, literal }) => {
            let cat = if *literal { &data.literal } else { &data.resolved };
            let t = cat.get(name)?;
            let mut j = report::table(t);
            let mut text = report::table_text(t);
            if let Some(e) = data.errata_for(name) {
                j["errata"] = json!({"issue": e.issue, "default_reading": e.default_reading()?.label});
                let _ = writeln!(text, "errata: {} (default reading {})", e.issue, e.default_reading()?.label);
            }
            Ok(Outcome::ok(Report::new(j, text)))
        }
        Command::CheckLeibniz { names, params, literal } => check_leibniz(&data, names, &params.bindings(), *literal),
        Command::Lcs { names, params } => lcs(&data.resolved, names, &params.bindings()),
        Command::Equations { algebra, op, params } => {
            let t = data.resolved.get(algebra)?;
            let t = t.bind(&restrict(&params.bindings(), t))?;
            Ok(Outcome::ok(report::equations(&build_system(&t, &op.kind()?))))
        }
        Command::Verify { files, symbolic_weight, literal } => {
            let mut fams = Vec::new();
            for f in files {
                fams.extend(load_families(resolve(f, &dir))?);
            }
            let cat = if *literal { &data.literal } else { &data.resolved };
            for f in &fams {
                cat.get(&f.algebra)?;
            }
            let audit = audit_families(cat, &fams, *symbolic_weight);
            let ok = audit.outcomes.iter().all(|o| o.classification.passed() || o.classification == crate::operators::Classification::Malformed);
            Ok(Outcome { report: report::audit(&audit), ok })
        }
        Command::DimReport { kind } => {
            let kind = OperatorKind::parse(kind, None)?;
            let fams = shipped_families(&data)?;
            let audit = audit_families(&data.resolved, &fams, false);
            let d = dimension_report(&data.resolved, &audit, &fams, kind.slug())?;
            let ok = d.matches_claim();
            Ok(Outcome { report: report::dimension(&d), ok })
        }
        Command::Enumerate { algebra, op, field, params, dual } => {
            let kind = op.kind()?;
            let t = data.resolved.get(algebra)?;
            let binding = restrict(&params.bindings(), t);
            let bound = t.bind(&binding)?;
            let fams: Vec<OperatorFamily> = verified_families(&data)?
                .into_iter()
                .filter(|f| f.algebra == t.name() && f.kind == kind && !f.malformed)
                .filter_map(|f| f.bind(&binding).ok())
                .collect();
            let cap = field.cap.unwrap_or(usize::MAX);
            let mut r = coverage(&bound, &kind, field.field, &fams, cap, field.budget, MEMBERSHIP_BUDGET)?;
            r.binding = binding;
            let d = if *dual { Some(dual_path_check(&bound, &kind, field.field, field.budget)?) } else { None };
            let ok = d.as_ref().map_or(true, |d| d.agree());
            Ok(Outcome { report: report::coverage(&r, d.as_ref()), ok })
        }
        Command::Coverage { kinds, field } => {
            let kinds = if kinds.is_empty() {
                KIND_SLUGS.iter().map(|k| OperatorKind::parse(k, None)).collect::<Result<Vec<_>>>()?
            } else {
                kinds.iter().map(|k| OperatorKind::parse(k, None)).collect::<Result<Vec<_>>>()?
            };
            let cfg = SweepConfig {
                p: field.field,
                kinds,
                cap: field.cap.unwrap_or(usize::MAX),
                budget: field.budget,
                membership_budget: MEMBERSHIP_BUDGET,
            };
            let s = coverage_sweep(&data.resolved, &verified_families(&data)?, &cfg)?;
            Ok(Outcome::ok(report::sweep(&s)))
        }
        Command::Compat { first, second, params } => {
            let (a, b) = (data.resolved.get(first)?, data.resolved.get(second)?);
            let bindings = params.bindings();
            let a = a.bind(&restrict(&bindings, a))?;
            let b = b.bind(&restrict(&bindings, b))?;
            let o = check_pair_over(&a, &b, &default_samples())?;
            let ok = o.compatible;
            Ok(Outcome { report: report::pair_outcome(&o), ok })
        }
        Command::CompatScan { params, claims, trials } => {
            let values = match params {
                Some(p) => parse_sample_values(p, &data.resolved)?,
                None => default_samples(),
            };
            let claims = load_claims(claims.clone().unwrap_or_else(|| dir.join("compat_claims.json")))?;
            let r = compat_scan(&data.resolved, &claims, &values, *trials)?;
            let mut rep = report::pair_report(&r);
            rep.json["combination_check"]["seed"] = json!(COMBINATION_SEED);
            let ok = r.claimed_but_failing.is_empty() && r.combination_failures.is_empty();
            Ok(Outcome { report: rep, ok })
        }
    }
}

fn resolve(path: &Path, data_dir: &Path) -> PathBuf {
    if path.exists() || path.is_absolute() {
        path.to_path_buf()
    } else {
        data_dir.join(path)
    }
}

pub fn shipped_families(data: &DataSet) -> Result<Vec<OperatorFamily>> {
    let mut out = Vec::new();
    for f in FAMILY_FILES {
        out.extend(load_families(data.families_dir().join(f))?);
    }
    Ok(out)
}

/// Shipped families that pass the audit against the resolved catalog.
pub fn verified_families(data: &DataSet) -> Result<Vec<OperatorFamily>> {
    let fams = shipped_families(data)?;
    let audit = audit_families(&data.resolved, &fams, false);
    Ok(audit.verified(&fams).into_iter().cloned().collect())
}

fn restrict(b: &Bindings, t: &AlgebraTable) -> Bindings {
    b.iter()
        .filter(|(k, _)| t.params().iter().any(|p| &p.param == *k))
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect()
}

fn selected<'a>(cat: &'a Catalog, names: &[String]) -> Result<Vec<&'a AlgebraTable>> {
    if names.is_empty() {
        Ok(cat.tables().iter().collect())
    } else {
        names.iter().map(|n| cat.get(n)).collect()
    }
}

fn check_declared(b: &Bindings, tables: &[&AlgebraTable]) -> Result<()> {
    for k in b.keys() {
        if !tables.iter().any(|t| t.params().iter().any(|p| &p.param == k)) {
            return Err(Error::Usage(format!("--param {k}: no selected algebra has a parameter named `{k}`")));
        }
    }
    Ok(())
}

/// The bindings to run for `t`: the user's, or every sample combination.
fn runs(t: &AlgebraTable, given: &Bindings) -> Vec<Bindings> {
    let b = restrict(given, t);
    if b.is_empty() {
        t.sample_bindings()
    } else {
        vec![b]
    }
}

fn catalog_list(data: &DataSet, literal: bool) -> Report {
    let cat = if literal { &data.literal } else { &data.resolved };
    let mut rows = Vec::new();
    let mut text = String::new();
    for t in cat.tables() {
        let params: Vec<String> = t.params().iter().map(|p| format!("{} in {}", p.param, p.admissible)).collect();
        let errata = data.errata_for(t.name()).map(|e| e.issue.clone());
        rows.push(json!({"name": t.name(), "dim": t.dim(), "params": params, "errata": errata}));
        let _ = write!(text, "{}  dim {}", t.name(), t.dim());
        if !params.is_empty() {
            let _ = write!(text, "  {}", params.join(", "));
        }
        if errata.is_some() {
            text.push_str("  (errata)");
        }
        text.push('\n');
    }
    Report::new(json!({"count": rows.len(), "algebras": rows}), text)
}

fn check_leibniz(data: &DataSet, names: &[String], given: &Bindings, literal: bool) -> Result<Outcome> {
    let cat = if literal { &data.literal } else { &data.resolved };
    let tables = selected(cat, names)?;
    check_declared(given, &tables)?;
    let mut rows = Vec::new();
    let mut text = String::new();
    let mut ok = true;
    for t in tables {
        let errata = data.errata_for(t.name());
        for b in runs(t, given) {
            let bound = t.bind(&b)?;
            let residual = leibniz_residual(&bound);
            let failing: Vec<[usize; 3]> = residual
                .nonzero_triples()
                .into_iter()
                .map(|(i, j, k)| [i + 1, j + 1, k + 1])
                .collect();
            let first = first_leibniz_failure(&bound).map(|((i, j, k), v)| ([i + 1, j + 1, k + 1], v));
            let mut readings = Vec::new();
            let mut covered = false;
            if let Some(e) = errata {
                for r in &e.readings {
                    let passes = leibniz_residual(&r.table.bind(&restrict(&b, &r.table))?).is_zero();
                    if passes && first.as_ref().is_some_and(|(tr, _)| e.failing.contains(tr)) {
                        covered = true;
                    }
                    readings.push(json!({"label": r.label, "default": r.default, "leibniz": passes}));
                }
            }
            let status = if failing.is_empty() {
                "leibniz"
            } else if covered {
                "errata"
            } else {
                ok = false;
                "fails"
            };
            let _ = write!(text, "{}{}: {status}", t.name(), binding_text(&b));
            if let Some((tr, v)) = &first {
                let vs: Vec<String> = v.iter().map(ToString::to_string).collect();
                let _ = write!(text, ", first failure at ({}, {}, {}): [{}]", tr[0], tr[1], tr[2], vs.join(", "));
            }
            text.push('\n');
            rows.push(json!({
                "algebra": t.name(),
                "binding": report::binding(&b),
                "status": status,
                "failing": failing,
                "first_failure": first.map(|(tr, v)| json!({"triple": tr, "value": report::exprs(&v)})),
                "errata": errata.map(|e| json!({"issue": e.issue, "failing": e.failing, "readings": readings})),
            }));
        }
    }
    let j = json!({"catalog": if literal { "literal" } else { "resolved" }, "results": rows, "ok": ok});
    Ok(Outcome { report: Report::new(j, text), ok })
}

fn lcs(cat: &Catalog, names: &[String], given: &Bindings) -> Result<Outcome> {
    let tables = selected(cat, names)?;
    check_declared(given, &tables)?;
    let mut rows = Vec::new();
    let mut text = String::new();
    let mut ok = true;
    for t in tables {
        for b in runs(t, given) {
            let series = lower_central_series(t, &b)?;
            let nilpotent = series.last() == Some(&0);
            ok &= nilpotent;
            let dims: Vec<String> = series.iter().map(ToString::to_string).collect();
            let _ = writeln!(
                text,
                "{}{}: [{}]{}",
                t.name(),
                binding_text(&b),
                dims.join(", "),
                if nilpotent { "" } else { " not nilpotent" }
            );
            rows.push(json!({"algebra": t.name(), "binding": report::binding(&b), "series": series, "nilpotent": nilpotent}));
        }
    }
    Ok(Outcome { report: Report::new(json!({"results": rows}), text), ok })
}

fn parse_sample_values(spec: &str, cat: &Catalog) -> Result<Vec<Scalar>> {
    let usage = |m: String| Error::Usage(format!("--params {spec}: {m}; expected NAME=V1,V2,... where {GRAMMAR}"));
    let (name, values) = spec.split_once('=').ok_or_else(|| usage("missing `=`".into()))?;
    let name = Param::new(name.trim());
    if !cat.tables().iter().any(|t| t.params().iter().any(|p| p.param == name)) {
        return Err(usage(format!("no algebra has a parameter named `{name}`")));
    }
    values
        .split(',')
        .map(|v| {
            parse_expr(v)
                .map_err(|e| usage(e.to_string()))?
                .as_constant()
                .ok_or_else(|| usage(format!("`{}` is not a number", v.trim())))
        })
        .collect()
}

/// Summary value for callers that only need the JSON.
pub fn execute_json(args: &[&str]) -> Result<Value> {
    let cli = Cli::try_parse_from(std::iter::once("leibniz").chain(args.iter().copied()))
        .map_err(|e| Error::Usage(e.to_string()))?;
    Ok(execute(&cli)?.report.json)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_commands() {
        let cli = Cli::try_parse_from(["leibniz", "--format", "json", "equations", "L1", "--op", "rb", "--weight", "-1"]).unwrap();
        assert_eq!(cli.format, Format::Json);
        assert!(matches!(cli.command, Command::Equations { .. }));
        assert!(Cli::try_parse_from(["leibniz", "lcs", "L13", "--param", "mu"]).is_err());
        assert!(Cli::try_parse_from(["leibniz", "verify"]).is_err());
    }

    #[test]
    fn sample_values() {
        let data = DataSet::load(default_data_dir()).unwrap();
        let v = parse_sample_values("mu=0,1,2", &data.resolved).unwrap();
        assert_eq!(v, vec![Scalar::from_int(0), Scalar::from_int(1), Scalar::from_int(2)]);
        assert!(parse_sample_values("nu=1", &data.resolved).is_err());
        assert!(parse_sample_values("mu=x", &data.resolved).is_err());
    }

    #[test]
    fn lcs_of_l1() {
        let j = execute_json(&["lcs", "L1"]).unwrap();
        assert_eq!(j["results"][0]["series"], json!([4, 3, 2, 1, 0]));
    }
}
