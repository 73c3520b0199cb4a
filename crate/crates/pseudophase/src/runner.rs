//! End-to-end commands. Each returns an [`Outcome`] holding the report text
//! and the files of its bundle; nothing here touches the clock or iterates
//! an unordered container, so identical inputs give identical bytes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use pseudophase_core::analysis::{
    extract_m_matrix, extract_period, reconstruct_terms, BitOrder, ModeMatrix, RegisterSplit, SuperpositionState,
    Thresholds,
};
use pseudophase_core::detection::correlation_scan;
use pseudophase_core::field::OpticalField;
use pseudophase_core::scenario::{self, reference_result_state, ScenarioName};
use pseudophase_core::sequence::{self, builtin_table, verify_family, PhaseSequence};
use serde_json::json;

use crate::diag::Diagnostic;
use crate::formats::{self, to_json_text};
use crate::netlist::parse_netlist;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Usage(String),
    #[error("{}", render_diagnostics(file, diagnostics))]
    Diagnostics { file: String, diagnostics: Vec<Diagnostic> },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] pseudophase_core::Error),
}

fn render_diagnostics(file: &str, diags: &[Diagnostic]) -> String {
    diags.iter().map(|d| d.render(file)).collect::<Vec<_>>().join("\n")
}

impl RunError {
    /// Every error is a usage, parse, I/O or configuration problem.
    pub fn exit_code(&self) -> i32 {
        2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    Mismatch,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Success => 0,
            Status::Mismatch => 1,
        }
    }
}

/// Output files keyed by file name.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Bundle {
    pub files: BTreeMap<String, String>,
}

impl Bundle {
    fn add(&mut self, name: &str, content: String) {
        self.files.insert(name.to_string(), content);
    }

    pub fn write_to(&self, dir: &Path) -> Result<(), RunError> {
        let io = |source| RunError::Io {
            path: dir.to_path_buf(),
            source,
        };
        fs::create_dir_all(dir).map_err(io)?;
        for (name, content) in &self.files {
            let path = dir.join(name);
            fs::write(&path, content).map_err(|source| RunError::Io { path, source })?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub status: Status,
    pub report: String,
    pub bundle: Bundle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Options {
    pub mu: f64,
    pub tau_slot: f64,
    pub epsilon_flat: f64,
    pub theta: f64,
    pub bit_order: BitOrder,
    /// Family file; the built-in family when absent.
    pub family: Option<PathBuf>,
    pub dump_fields: bool,
    pub traces: bool,
    pub samples_per_slot: usize,
}

impl Default for Options {
    fn default() -> Self {
        let th = Thresholds::default();
        Options {
            mu: 1.0,
            tau_slot: 1.0,
            epsilon_flat: th.epsilon_flat(),
            theta: th.theta(),
            bit_order: BitOrder::MsbFirst,
            family: None,
            dump_fields: false,
            traces: false,
            samples_per_slot: 1,
        }
    }
}

/// Validated options plus the loaded family.
struct Config<'a> {
    opts: &'a Options,
    thresholds: Thresholds,
    family: Vec<PhaseSequence>,
    family_source: String,
}

fn read(path: &Path) -> Result<String, RunError> {
    fs::read_to_string(path).map_err(|source| RunError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn positive(name: &str, v: f64) -> Result<(), RunError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(RunError::Usage(format!("--{} must be a positive finite number, got {}", name, v)))
    }
}

impl<'a> Config<'a> {
    fn new(opts: &'a Options) -> Result<Self, RunError> {
        positive("mu", opts.mu)?;
        positive("tau-slot", opts.tau_slot)?;
        let thresholds = Thresholds::new(opts.epsilon_flat, opts.theta).map_err(|_| {
            RunError::Usage(format!(
                "--epsilon-flat and --theta must lie strictly between 0 and 1, got {} and {}",
                opts.epsilon_flat, opts.theta
            ))
        })?;
        if opts.samples_per_slot == 0 {
            return Err(RunError::Usage("--samples-per-slot must be at least 1".into()));
        }
        let (family, family_source) = match &opts.family {
            None => (builtin_table(), "builtin".to_string()),
            Some(p) => {
                let text = read(p)?;
                let fam = formats::parse_family(&text).map_err(|diagnostics| RunError::Diagnostics {
                    file: p.display().to_string(),
                    diagnostics,
                })?;
                (fam, p.display().to_string())
            }
        };
        Ok(Config {
            opts,
            thresholds,
            family,
            family_source,
        })
    }

    fn echo(&self, command: serde_json::Value, lo_ids: &[u8]) -> String {
        let codes: Vec<Vec<u8>> = self
            .family
            .iter()
            .map(|s| s.codes().iter().map(|c| c.quarter_turns()).collect())
            .collect();
        to_json_text(&json!({
            "command": command,
            "mu": self.opts.mu,
            "tau_slot": self.opts.tau_slot,
            "epsilon_flat": self.opts.epsilon_flat,
            "theta": self.opts.theta,
            "bit_order": self.opts.bit_order.as_str(),
            "samples_per_slot": self.opts.samples_per_slot,
            "family_source": self.family_source,
            "family": codes,
            "sequence_ids": lo_ids,
        }))
    }

    fn resolve_all(&self, ids: &[u8]) -> Result<Vec<PhaseSequence>, RunError> {
        Ok(ids
            .iter()
            .map(|&id| sequence::resolve(&self.family, id))
            .collect::<Result<Vec<_>, _>>()?)
    }
}

/// Scan → extract → reconstruct, adding the shared bundle files.
fn analyze(
    cfg: &Config<'_>,
    fields: &[OpticalField],
    lo_family: &[PhaseSequence],
    bundle: &mut Bundle,
    report: &mut String,
) -> Result<(ModeMatrix, SuperpositionState), RunError> {
    let o = cfg.opts;
    let table = correlation_scan(fields, lo_family, o.mu, o.tau_slot)?;
    let m = extract_m_matrix(&table, &cfg.thresholds);
    let state = reconstruct_terms(&m);

    let (csv, jsonl) = formats::correlation_outputs(&table);
    bundle.add("correlation.csv", csv);
    bundle.add("correlation.jsonl", jsonl);
    bundle.add("m_matrix.txt", formats::render_m(&m));
    bundle.add("m_matrix.json", to_json_text(&formats::m_json(&m)));
    bundle.add("reconstruction.txt", formats::render_state(&state));
    bundle.add("reconstruction.json", to_json_text(&formats::state_json(&state)));
    if o.dump_fields {
        bundle.add("fields.csv", formats::fields_csv(fields));
    }
    if o.traces {
        bundle.add(
            "traces.csv",
            formats::traces_csv(fields, lo_family, o.mu, o.tau_slot, o.samples_per_slot)?,
        );
    }

    report.push_str("M matrix:\n");
    report.push_str(&formats::render_m(&m));
    let _ = writeln!(report, "terms ({}):", state.len());
    report.push_str(&formats::render_state(&state));
    Ok((m, state))
}

fn compare(expected: &ModeMatrix, actual: &ModeMatrix, report: &mut String) -> Status {
    if expected.same_entries(actual) {
        report.push_str("M matrix matches the expected pattern\n");
        Status::Success
    } else {
        report.push_str("M matrix MISMATCH\n");
        report.push_str(&formats::render_m_diff(expected, actual));
        Status::Mismatch
    }
}

pub fn parse_ids(s: &str) -> Result<Vec<u8>, RunError> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<u8>()
                .map_err(|_| RunError::Usage(format!("invalid sequence id `{}` in `{}`", t.trim(), s)))
        })
        .collect()
}

/// Builds, scans and analyzes a named scenario. `ids` picks the three
/// sequences of the three-field states.
pub fn run_demo(name: &str, ids: Option<&[u8]>, opts: &Options) -> Result<Outcome, RunError> {
    let cfg = Config::new(opts)?;
    let name: ScenarioName = name.parse().map_err(|_| {
        RunError::Usage(format!("unknown demo `{}` (expected product, ghz, w or shor15)", name))
    })?;
    let ids: [u8; 3] = match ids {
        None => scenario::DEFAULT_IDS,
        Some(v) => v
            .try_into()
            .map_err(|_| RunError::Usage(format!("--ids takes exactly three ids, got {}", v.len())))?,
    };
    let sc = scenario::build(name, &cfg.family, ids)?;
    let lo_ids = sc.sequence_ids();

    let mut report = format!("demo {}: sequences {}\n", name, join(&lo_ids));
    let mut bundle = Bundle::default();
    let (m, state) = analyze(&cfg, &sc.fields, &sc.lo_family, &mut bundle, &mut report)?;

    let split = sc.register_split.clone();
    bundle.add(
        "scenario.json",
        to_json_text(&json!({
            "name": name.as_str(),
            "sequence_ids": lo_ids,
            "fields": sc.fields.len(),
            "register_split": split.as_ref().map(|s| json!({ "x_fields": s.x_fields, "f_fields": s.f_fields })),
        })),
    );
    bundle.add("config.json", cfg.echo(json!({ "demo": name.as_str() }), &lo_ids));

    if let Some(split) = split {
        let reference = extract_period(&reference_result_state())?;
        let reconstructed = extract_period(&state.with_register(split, opts.bit_order))?;
        report.push_str("period of the reference result state: ");
        report.push_str(&formats::render_period(&reference));
        let _ = write!(
            report,
            "period from the reconstructed terms ({} first): ",
            opts.bit_order.as_str()
        );
        report.push_str(&formats::render_period(&reconstructed));
        bundle.add(
            "period.json",
            to_json_text(&json!({
                "reference": formats::period_json(&reference),
                "reconstructed": formats::period_json(&reconstructed),
                "bit_order": opts.bit_order.as_str(),
            })),
        );
    }

    let status = match &sc.expected_m {
        Some(expected) => compare(expected, &m, &mut report),
        None => Status::Success,
    };
    Ok(Outcome { status, report, bundle })
}

fn diagnostics(path: &Path) -> impl FnOnce(Vec<Diagnostic>) -> RunError + '_ {
    move |diagnostics| RunError::Diagnostics {
        file: path.display().to_string(),
        diagnostics,
    }
}

/// Parses and evaluates a netlist, then scans its sink fields. The LO set
/// is `lo` if given, else the expect file's `# sequences:` header, else the
/// whole family.
pub fn run_netlist(
    path: &Path,
    expect: Option<&Path>,
    lo: Option<&[u8]>,
    opts: &Options,
) -> Result<Outcome, RunError> {
    let cfg = Config::new(opts)?;
    let net = parse_netlist(&read(path)?).map_err(diagnostics(path))?;
    let expected = match expect {
        Some(p) => Some(formats::parse_mfile(&read(p)?).map_err(diagnostics(p))?),
        None => None,
    };
    let lo_ids: Vec<u8> = match (lo, expected.as_ref().and_then(|e| e.sequence_ids.clone())) {
        (Some(ids), _) => ids.to_vec(),
        (None, Some(ids)) => ids,
        (None, None) => cfg.family.iter().map(PhaseSequence::id).collect(),
    };
    if lo_ids.is_empty() {
        return Err(RunError::Usage("no LO sequences selected".into()));
    }
    let lo_family = cfg.resolve_all(&lo_ids)?;
    let fields = net.evaluate(&cfg.family)?;
    if fields.is_empty() {
        return Err(RunError::Usage(format!("{}: netlist has no sinks", path.display())));
    }

    let mut report = format!(
        "run {}: {} field(s), sequences {}\n",
        path.display(),
        fields.len(),
        join(&lo_ids)
    );
    let mut bundle = Bundle::default();
    let (m, _) = analyze(&cfg, &fields, &lo_family, &mut bundle, &mut report)?;
    bundle.add(
        "config.json",
        cfg.echo(
            json!({
                "run": path.display().to_string(),
                "expect": expect.map(|p| p.display().to_string()),
            }),
            &lo_ids,
        ),
    );

    let status = match expected {
        Some(e) => compare(&e.to_matrix(), &m, &mut report),
        None => Status::Success,
    };
    Ok(Outcome { status, report, bundle })
}

/// Enumerates the terms an M matrix admits; with `x_fields`, also reads the
/// leading `x_fields` rows as the argument register and reports the period.
pub fn reconstruct(path: &Path, x_fields: Option<usize>, opts: &Options) -> Result<Outcome, RunError> {
    let cfg = Config::new(opts)?;
    let mfile = formats::parse_mfile(&read(path)?).map_err(diagnostics(path))?;
    let m = mfile.to_matrix();
    let mut state = reconstruct_terms(&m);

    let mut report = format!("reconstruct {}: {} terms\n", path.display(), state.len());
    report.push_str(&formats::render_state(&state));
    let mut bundle = Bundle::default();
    if let Some(x) = x_fields {
        if x == 0 || x >= m.n_rows() {
            return Err(RunError::Usage(format!(
                "--x-fields must be between 1 and {}, got {}",
                m.n_rows().saturating_sub(1),
                x
            )));
        }
        state = state.with_register(RegisterSplit::leading(x, m.n_rows()), opts.bit_order);
        if !state.is_empty() {
            let p = extract_period(&state)?;
            let _ = write!(report, "period ({} first): ", opts.bit_order.as_str());
            report.push_str(&formats::render_period(&p));
            bundle.add("period.json", to_json_text(&formats::period_json(&p)));
        }
    }
    bundle.add("reconstruction.txt", formats::render_state(&state));
    bundle.add("reconstruction.json", to_json_text(&formats::state_json(&state)));
    bundle.add(
        "config.json",
        cfg.echo(
            json!({ "reconstruct": path.display().to_string(), "x_fields": x_fields }),
            m.col_ids(),
        ),
    );
    Ok(Outcome {
        status: Status::Success,
        report,
        bundle,
    })
}

/// Balance, pairwise agreement and XOR closure of the active family.
pub fn check_family(opts: &Options) -> Result<Outcome, RunError> {
    let cfg = Config::new(opts)?;
    let fam = &cfg.family;
    let rep = verify_family(fam);
    let ok = |b: bool| if b { "ok" } else { "FAIL" };

    let mut report = format!("family: {} ({} sequences)\n", cfg.family_source, fam.len());
    let unbalanced: Vec<u8> = fam
        .iter()
        .zip(&rep.balanced)
        .filter(|(s, &b)| !b && s.zero_count() != s.len())
        .map(|(s, _)| s.id())
        .collect();
    let _ = writeln!(
        report,
        "balance: {}{}",
        ok(rep.nonzero_balanced(fam)),
        if unbalanced.is_empty() {
            String::new()
        } else {
            format!(" (unbalanced: {})", join(&unbalanced))
        }
    );
    let agreement = rep.uniform_cross_agreement();
    let _ = writeln!(
        report,
        "pairwise agreement: {}{}",
        ok(fam.len() < 2 || agreement.is_some()),
        agreement.map_or(String::from(" (not uniform)"), |a| format!(" ({} slots for every pair)", a))
    );
    let _ = writeln!(report, "closure under XOR: {}", ok(rep.closed_under_xor));
    report.push_str("agreement counts:\n");
    for row in &rep.pairwise_agreements {
        let cells: Vec<String> = row.iter().map(|a| format!("{:>2}", a)).collect();
        let _ = writeln!(report, "  {}", cells.join(" "));
    }

    let status = if rep.all_passed(fam) {
        Status::Success
    } else {
        Status::Mismatch
    };
    Ok(Outcome {
        status,
        report,
        bundle: Bundle::default(),
    })
}

/// Lists the active family, one sequence per line.
pub fn sequences(opts: &Options) -> Result<Outcome, RunError> {
    let cfg = Config::new(opts)?;
    let mut report = String::new();
    for s in &cfg.family {
        let codes: Vec<String> = s.codes().iter().map(|c| c.quarter_turns().to_string()).collect();
        let _ = writeln!(report, "{:>3}  {}", s.id(), codes.join(" "));
    }
    Ok(Outcome {
        status: Status::Success,
        report,
        bundle: Bundle::default(),
    })
}

fn join<T: std::fmt::Display>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}
