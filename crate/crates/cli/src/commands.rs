use std::io::Write;
use std::path::{Path, PathBuf};

use cellscape::defaults::Defaults;
use cellscape::io::{layout_to_string, load_layout_with, LayoutFormat, LoadOptions};
use cellscape::matching::metric_report;
use cellscape::spatial::cross_k_matrix;
use cellscape::synthesis::{synthesize_with_defaults, SynthesisConfig};
use cellscape::topology::{
    per_class_diagrams, union_diagram, vectorize_diagram, DiagramConfig, PersistenceBuckets,
};
use cellscape::{BandwidthSet, CellLayout, Domain, RadiusGrid};

use crate::args::{
    AnalyzeArgs, CompareArgs, DescriptorArgs, FormatArg, RenderArgs, SynthesizeArgs, VectorizeArgs,
};
use crate::report::{
    to_json, AnalyzeReport, CompareReport, CrossKEntry, DefaultsEcho, DiagramFile, DiagramJson,
    FeatureJson, Parameters, SynthesisReport, ToolInfo, VectorizeReport,
};
use crate::{svg, CliError, CliResult};

fn layout_format(path: &Path, flag: Option<FormatArg>) -> CliResult<LayoutFormat> {
    if let Some(f) = flag {
        return Ok(f.into());
    }
    LayoutFormat::from_path(path).ok_or_else(|| {
        CliError::validation(format!(
            "cannot infer the layout format of {}; pass --format",
            path.display()
        ))
    })
}

fn load(path: &Path, flag: Option<FormatArg>, opts: &LoadOptions) -> CliResult<CellLayout> {
    let format = layout_format(path, flag)?;
    Ok(load_layout_with(path, format, opts)?)
}

fn write_file(path: &Path, text: &str) -> CliResult {
    std::fs::write(path, text)
        .map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))
}

fn emit(out: &mut dyn Write, text: &str) -> CliResult {
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::io(format!("cannot write output: {e}")))
}

fn diagram_config(
    domain: &Domain,
    defaults: &Defaults,
    args: &DescriptorArgs,
) -> CliResult<DiagramConfig> {
    let mut cfg = defaults.diagram_config(domain)?;
    if let Some(r) = &args.radii {
        cfg.radii = RadiusGrid::new(r.clone())?;
    }
    if let Some(s) = &args.sigmas {
        cfg.sigmas = BandwidthSet::new(s.clone())?;
    }
    if let Some(h) = args.grid_h {
        cfg.h = h;
        cfg.persistence_floor = Some(defaults.persistence_floor_factor * h);
    }
    Ok(cfg)
}

fn buckets(
    domain: &Domain,
    defaults: &Defaults,
    flag: &Option<Vec<f64>>,
) -> CliResult<PersistenceBuckets> {
    Ok(match flag {
        Some(b) => PersistenceBuckets::new(b.clone())?,
        None => defaults.buckets(domain)?,
    })
}

pub fn cmd_analyze(args: &AnalyzeArgs, out: &mut dyn Write) -> CliResult {
    let defaults = DefaultsEcho::load()?;
    let layout = load(&args.layout, args.descriptors.format, &LoadOptions::default())?;
    let domain = *layout.domain();
    let cfg = diagram_config(&domain, &defaults.values, &args.descriptors)?;
    let buckets = buckets(&domain, &defaults.values, &args.buckets)?;

    let diagrams = per_class_diagrams(&layout, &cfg)?;
    let union = if args.union_diagram {
        Some(union_diagram(&layout, &cfg)?)
    } else {
        None
    };
    let cross_k = cross_k_matrix(&layout, &cfg.radii)
        .into_iter()
        .flatten()
        .map(|k| CrossKEntry {
            source: k.source_class.unwrap_or(0),
            target: k.target_class,
            values: k.values,
            degenerate: k.degenerate,
        })
        .collect();
    let features = diagrams
        .iter()
        .map(|d| FeatureJson::new(&vectorize_diagram(d, &buckets), &layout))
        .collect();

    let report = AnalyzeReport {
        tool: ToolInfo::current(),
        parameters: Parameters::new(&cfg, Some(&buckets)),
        defaults,
        domain: domain.as_array(),
        classes: layout.class_names().to_vec(),
        class_counts: layout.class_counts(),
        diagrams: diagrams.iter().map(|d| DiagramJson::new(d, &layout)).collect(),
        union_diagram: union.as_ref().map(|d| DiagramJson::new(d, &layout)),
        cross_k,
        features,
    };
    let json = to_json(&report)?;
    match &args.output {
        Some(p) => write_file(p, &json),
        None => emit(out, &json),
    }
}

/// Loads a generated layout so that its class ids follow `reference`. Class
/// sets must be equal.
fn load_aligned(
    path: &Path,
    flag: Option<FormatArg>,
    reference: &CellLayout,
) -> CliResult<CellLayout> {
    let gen = load(path, flag, &LoadOptions::default())?;
    if gen.class_names() == reference.class_names() {
        return Ok(gen);
    }
    let mut a = gen.class_names().to_vec();
    let mut b = reference.class_names().to_vec();
    a.sort();
    b.sort();
    if a != b {
        return Err(CliError::validation(format!(
            "class sets differ: generated {:?}, reference {:?}",
            gen.class_names(),
            reference.class_names()
        )));
    }
    let opts = LoadOptions {
        class_map: Some(reference.class_names().to_vec()),
        domain: Some(*gen.domain()),
        ..LoadOptions::default()
    };
    load(path, flag, &opts)
}

pub fn cmd_compare(args: &CompareArgs, out: &mut dyn Write) -> CliResult {
    let defaults = DefaultsEcho::load()?;
    let reference = load(&args.reference, args.descriptors.format, &LoadOptions::default())?;
    let gen = load_aligned(&args.generated, args.descriptors.format, &reference)?;
    let cfg = diagram_config(reference.domain(), &defaults.values, &args.descriptors)?;
    let metrics = metric_report(&gen, &reference, &cfg)?;
    let table = metrics.to_table();
    let report = CompareReport {
        tool: ToolInfo::current(),
        defaults,
        parameters: Parameters::new(&cfg, None),
        classes: reference.class_names().to_vec(),
        metrics,
    };
    let json = to_json(&report)?;
    if let Some(p) = &args.output {
        write_file(p, &json)?;
    }
    if args.json {
        emit(out, &json)
    } else {
        emit(out, &table)
    }
}

/// Starts from the active defaults and overlays the keys present in a JSON
/// configuration file.
fn synthesis_config(args: &SynthesizeArgs, defaults: &Defaults) -> CliResult<SynthesisConfig> {
    let mut cfg = SynthesisConfig::from_defaults(defaults);
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::io(format!("cannot read {}: {e}", path.display())))?;
        let overlay: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
        let serde_json::Value::Object(overlay) = overlay else {
            return Err(CliError::validation(format!(
                "{}: configuration must be a JSON object",
                path.display()
            )));
        };
        let mut base = serde_json::to_value(&cfg)
            .map_err(|e| CliError::internal(format!("serializing configuration: {e}")))?;
        let fields = base.as_object_mut().expect("config serializes to an object");
        for (k, v) in overlay {
            if !fields.contains_key(&k) {
                return Err(CliError::validation(format!(
                    "{}: unknown configuration key '{k}'",
                    path.display()
                )));
            }
            fields.insert(k, v);
        }
        cfg = serde_json::from_value(base)
            .map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
    }
    let d = &args.descriptors;
    if let Some(r) = &d.radii {
        cfg.radii = Some(RadiusGrid::new(r.clone())?);
    }
    if let Some(s) = &d.sigmas {
        cfg.sigmas = Some(BandwidthSet::new(s.clone())?);
    }
    if let Some(h) = d.grid_h {
        cfg.h = Some(h);
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(s) = args.steps {
        cfg.steps = s;
    }
    if let Some(l) = args.lambda_cc {
        cfg.lambda_cc = l;
    }
    if let Some(l) = args.lambda_k {
        cfg.lambda_k = l;
    }
    if let Some(m) = args.min_separation {
        cfg.min_separation = Some(m);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn default_trace_path(output: &Path) -> PathBuf {
    let stem = output
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "synthesized".into());
    output.with_file_name(format!("{stem}.trace.csv"))
}

pub fn cmd_synthesize(args: &SynthesizeArgs, out: &mut dyn Write) -> CliResult {
    let defaults = DefaultsEcho::load()?;
    let reference = load(&args.reference, args.descriptors.format, &LoadOptions::default())?;
    let out_format = layout_format(&args.output, args.descriptors.format)?;
    let init_format = match &args.emit_init {
        Some(p) => Some(layout_format(p, args.descriptors.format)?),
        None => None,
    };
    let cfg = synthesis_config(args, &defaults.values)?;
    let outcome = synthesize_with_defaults(&reference, &cfg, &defaults.values)?;

    // Final metrics use the full reporting grid.
    let report_args = DescriptorArgs {
        grid_h: None,
        ..args.descriptors.clone()
    };
    let report_cfg = diagram_config(reference.domain(), &defaults.values, &report_args)?;
    let metrics = metric_report(&outcome.layout, &reference, &report_cfg)?;
    let init_metrics = metric_report(&outcome.initial_layout, &reference, &report_cfg)?;

    write_file(&args.output, &layout_to_string(&outcome.layout, out_format)?)?;
    let trace_path = args
        .trace
        .clone()
        .unwrap_or_else(|| default_trace_path(&args.output));
    write_file(&trace_path, &outcome.trace.to_csv())?;
    if let (Some(p), Some(f)) = (&args.emit_init, init_format) {
        write_file(p, &layout_to_string(&outcome.initial_layout, f)?)?;
    }

    let accepted = outcome.trace.steps.iter().filter(|s| s.accepted).count();
    let mut summary = String::new();
    summary.push_str(&format!(
        "steps: {} (accepted {accepted})\n",
        outcome.trace.len()
    ));
    summary.push_str(&format!(
        "objective: initial {:.6}, final {:.6}\n",
        outcome.initial_objective.total, outcome.best_objective.total
    ));
    summary.push_str(&format!(
        "cells: {} ({} before overlap removal)\n",
        outcome.layout.len(),
        outcome.best_layout.len()
    ));
    summary.push_str(&format!(
        "mean PD-CCMD: synthesized {:.6}, initial {:.6}\n\n",
        metrics.mean.pd_ccmd, init_metrics.mean.pd_ccmd
    ));
    summary.push_str("synthesized vs reference\n");
    summary.push_str(&metrics.to_table());
    summary.push_str("\ninitial vs reference\n");
    summary.push_str(&init_metrics.to_table());

    if let Some(p) = &args.report {
        let report = SynthesisReport {
            tool: ToolInfo::current(),
            defaults,
            objective_parameters: Parameters::new(&outcome.objective_config.diagram, None),
            report_parameters: Parameters::new(&report_cfg, None),
            lambda_cc: cfg.lambda_cc,
            lambda_k: cfg.lambda_k,
            config: cfg,
            initial_objective: outcome.initial_objective,
            best_objective: outcome.best_objective,
            accepted_steps: accepted,
            cells_before_overlap_removal: outcome.best_layout.len(),
            cells: outcome.layout.len(),
            metrics,
            init_metrics,
        };
        write_file(p, &to_json(&report)?)?;
    }
    emit(out, &summary)
}

pub fn cmd_vectorize(args: &VectorizeArgs, out: &mut dyn Write) -> CliResult {
    let defaults = DefaultsEcho::load()?;
    let layout = load(&args.layout, args.descriptors.format, &LoadOptions::default())?;
    let domain = *layout.domain();
    let cfg = diagram_config(&domain, &defaults.values, &args.descriptors)?;
    let buckets = buckets(&domain, &defaults.values, &args.buckets)?;
    let features = per_class_diagrams(&layout, &cfg)?
        .iter()
        .map(|d| FeatureJson::new(&vectorize_diagram(d, &buckets), &layout))
        .collect();
    let union_feature = if args.union_diagram {
        let d = union_diagram(&layout, &cfg)?;
        Some(FeatureJson::new(&vectorize_diagram(&d, &buckets), &layout))
    } else {
        None
    };
    let report = VectorizeReport {
        tool: ToolInfo::current(),
        defaults,
        parameters: Parameters::new(&cfg, Some(&buckets)),
        features,
        union_feature,
    };
    let json = to_json(&report)?;
    match &args.output {
        Some(p) => write_file(p, &json),
        None => emit(out, &json),
    }
}

pub fn cmd_render(args: &RenderArgs, _out: &mut dyn Write) -> CliResult {
    let layout = load(&args.layout, args.format, &LoadOptions::default())?;
    let diagrams = match &args.diagram {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::io(format!("cannot read {}: {e}", path.display())))?;
            let file: DiagramFile = serde_json::from_str(&text)
                .map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
            let mut all = file.diagrams;
            all.extend(file.union_diagram);
            Some(all)
        }
        None => None,
    };
    write_file(&args.output, &svg::render(&layout, diagrams.as_deref()))
}
