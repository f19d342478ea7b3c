use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use rulelens_client::CurationClient;
use rulelens_core::canonical;
use rulelens_core::curation::{
    cohens_kappa, CategoryWeights, Classifier, CurationSession, ItemAnnotation, ItemPut, RulePatch, RuleQuery,
};
use rulelens_core::data::{split_train_test, CutTable, Dataset, Schema};
use rulelens_core::discretize::discretize_dataset;
use rulelens_core::evaluator::{
    align_scores, auc, classification_metrics, patient_coverage, positive_labels, predict, predicted_values,
    read_scores, summarize_coverage, write_figures, write_scores, ClassificationMetrics, CoverageStats,
};
use rulelens_core::explainer::{
    explain, DisjointItems, ExplainIndex, ExplanationConfig, ExplanationReport, SelectionAlgorithm,
};
use rulelens_core::miner::{build_item_universe, mine, MiningConfig, Rule, SupportMode};
use rulelens_core::pruner::{
    delta_sweep, prune_cascade, prune_redundant, restrict_universe, AllowedValues, PruneConfig, StageCount,
};
use rulelens_core::synth::{generate, SynthConfig};
use rulelens_core::Error;
use serde::Serialize;

use crate::failure::{CliResult, Failure};
use crate::{info, warning, AlgorithmArg, Command, CurateAction, DisjointItemsArg, FitOn, ModelArgs, SupportModeArg};

pub fn run(command: Command) -> CliResult {
    match command {
        Command::Synth(a) => synth(a),
        Command::Split(a) => split(a),
        Command::Discretize(a) => discretize(a),
        Command::Mine(a) => mine_rules(a),
        Command::Prune(a) => prune(a),
        Command::CurateInit(a) => curate_init(a),
        Command::CurateExport(a) => curate_export(a),
        Command::CurateServe(a) => curate_serve(a),
        Command::Curate(a) => curate(a),
        Command::Explain(a) => explain_patients(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Kappa(a) => kappa(a),
    }
}

/// Writes `text` to `out`, or to stdout.
fn emit(out: Option<&Path>, text: &str) -> CliResult {
    match out {
        Some(path) => Ok(canonical::write_atomic(path, text)?),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|()| stdout.flush())
                .map_err(|e| Error::Io { path: "<stdout>".into(), source: e }.into())
        }
    }
}

fn load(input: &crate::DataArgs) -> CliResult<Dataset> {
    let schema = Schema::load(&input.schema)?;
    Ok(Dataset::load_csv(&input.data, &schema)?)
}

fn write_dataset(path: &Path, dataset: &Dataset) -> CliResult {
    let mut buf = Vec::new();
    dataset.write_csv(&mut buf)?;
    Ok(canonical::write_atomic(path, &String::from_utf8_lossy(&buf))?)
}

fn load_classifier(model: &ModelArgs, schema: &Schema) -> CliResult<Classifier> {
    match (&model.classifier, &model.rules) {
        (Some(path), _) => Ok(Classifier::load(path)?),
        (None, Some(path)) => {
            let rules: Vec<Rule> = canonical::read_json_lines(path)?;
            Ok(Classifier::from_rules(rules, schema.outcome().interesting_values.clone()))
        }
        (None, None) => Err(Failure::Usage("one of --classifier or --rules is required".into())),
    }
}

fn synth(a: crate::SynthArgs) -> CliResult {
    let config = SynthConfig {
        rows: a.rows,
        features: a.features,
        planted: a.planted,
        seed: a.seed,
        base_rate: a.base_rate,
        missing_rate: a.missing_rate,
        ..SynthConfig::default()
    };
    let out = generate(&config)?;
    let dir = &a.out_dir;
    std::fs::create_dir_all(dir).map_err(|e| Error::Io { path: dir.clone(), source: e })?;
    canonical::write_json(dir.join("schema.json"), &out.dataset.schema)?;
    write_dataset(&dir.join("data.csv"), &out.dataset)?;
    write_scores(dir.join("scores.csv"), &out.scores)?;
    canonical::write_json(dir.join("manifest.json"), &out.manifest)?;
    info!(
        "{} rows, {} planted rules over {} features",
        out.dataset.len(),
        out.manifest.planted.len(),
        out.manifest.planted_features.len()
    );
    Ok(())
}

fn split(a: crate::SplitArgs) -> CliResult {
    let dataset = load(&a.input)?;
    let (train, test) = split_train_test(&dataset, a.fraction, a.seed)?;
    write_dataset(&a.train, &train)?;
    write_dataset(&a.test, &test)?;
    info!("{} training and {} test rows", train.len(), test.len());
    Ok(())
}

fn discretize(a: crate::DiscretizeArgs) -> CliResult {
    let train = load(&a.input)?;
    let cuts = discretize_dataset(&train)?;
    canonical::write_json(&a.out, &cuts)?;
    let n: usize = cuts.values().map(Vec::len).sum();
    info!("{n} cut points over {} continuous features", cuts.len());
    Ok(())
}

fn mine_rules(a: crate::MineArgs) -> CliResult {
    let train = load(&a.input)?;
    let cuts: CutTable = match &a.cuts {
        Some(path) => canonical::read_json(path)?,
        None => discretize_dataset(&train)?,
    };
    let mut config = MiningConfig::for_schema(&train.schema);
    config.min_support = a.min_support;
    config.min_confidence = a.min_confidence;
    config.max_len = a.max_len;
    config.support_mode = match a.support_mode {
        SupportModeArg::Joint => SupportMode::Joint,
        SupportModeArg::Lhs => SupportMode::Lhs,
    };
    if let Some(features) = a.features {
        config.model_features = features.into_iter().collect();
    }
    let mut universe = build_item_universe(&train.schema, &cuts, &config)?;
    if let Some(path) = &a.allowed {
        let allowed: AllowedValues = canonical::read_json(path)?;
        allowed.validate(&train.schema, &cuts)?;
        universe = restrict_universe(&universe, &allowed);
    }
    let rules = mine(&train, &universe, &config)?;
    canonical::write_json_lines(&a.out, &rules)?;
    info!("{} rules from {} items", rules.len(), universe.len());
    Ok(())
}

fn stage_csv(counts: &[StageCount]) -> String {
    let mut out = String::from("stage,count\n");
    for c in counts {
        out.push_str(&format!("{},{}\n", c.stage, c.count));
    }
    out
}

fn prune(a: crate::PruneArgs) -> CliResult {
    let rules: Vec<Rule> = canonical::read_json_lines(&a.rules)?;
    let allowed: Option<AllowedValues> = a.allowed.as_ref().map(canonical::read_json).transpose()?;
    if let (Some(allowed), Some(schema), Some(cuts)) = (&allowed, &a.schema, &a.cuts) {
        let cuts: CutTable = canonical::read_json(cuts)?;
        allowed.validate(&Schema::load(schema)?, &cuts)?;
    } else if allowed.is_some() {
        warning!("allowed values not checked against a discretization; pass --schema and --cuts to check");
    }
    let (survivors, counts) = prune_cascade(&rules, &PruneConfig { delta: a.delta, allowed })?;
    canonical::write_json_lines(&a.out, &survivors)?;
    if let Some(path) = &a.report {
        canonical::write_json(path, &counts)?;
    }
    if let Some(path) = &a.report_csv {
        canonical::write_atomic(path, &stage_csv(&counts))?;
    }
    if let (Some(path), Some(deltas)) = (&a.sweep, &a.sweep_deltas) {
        let curve = delta_sweep(&prune_redundant(&rules), deltas)?;
        let mut csv = String::from("delta,rules\n");
        for (delta, n) in curve {
            csv.push_str(&format!("{},{n}\n", canonical::format_float(delta)));
        }
        canonical::write_atomic(path, &csv)?;
    }
    let trail: Vec<String> = counts.iter().map(|c| format!("{} {}", c.stage, c.count)).collect();
    info!("{}", trail.join(", "));
    Ok(())
}

fn curate_init(a: crate::CurateInitArgs) -> CliResult {
    let schema = Schema::load(&a.schema)?;
    let rules: Vec<Rule> = canonical::read_json_lines(&a.rules)?;
    let counts: Vec<StageCount> = match &a.report {
        Some(path) => canonical::read_json(path)?,
        None => Vec::new(),
    };
    let mut session = CurationSession::new(rules, schema.outcome().interesting_values.clone(), counts)?;
    if let Some(path) = &a.items {
        let items: Vec<ItemAnnotation> = canonical::read_json(path)?;
        for ann in items {
            let id = ann.item.id();
            let put = ItemPut { interventions: ann.interventions, category: ann.category, version: 0 };
            match session.put_item(&id, put) {
                Ok(_) => {}
                Err(Error::NotFound(_)) => warning!("item `{id}` appears in no rule; skipped"),
                Err(e) => return Err(e.into()),
            }
        }
    }
    if a.accept_suggestions {
        let ids: Vec<String> = session.rules().iter().map(|r| r.id.clone()).collect();
        let mut accepted = 0;
        for id in ids {
            let view = session.rule_view(&id)?;
            if view.suggestions.is_empty() {
                continue;
            }
            let patch = RulePatch {
                interventions: Some(view.suggestions),
                version: view.version,
                ..RulePatch::default()
            };
            session.patch_rule(&id, patch)?;
            accepted += 1;
        }
        info!("accepted suggestions on {accepted} rules");
    }
    session.save(&a.out)?;
    info!("session with {} rules", session.rules().len());
    Ok(())
}

fn curate_export(a: crate::CurateExportArgs) -> CliResult {
    let session = CurationSession::load(&a.session)?;
    let (classifier, summary) = session.export()?;
    classifier.save(&a.out)?;
    info!(
        "{} rules ({} actionable, {} removed, {} unreviewed)",
        summary.rules, summary.actionable, summary.removed, summary.unreviewed
    );
    Ok(())
}

fn runtime() -> CliResult<tokio::runtime::Runtime> {
    tokio::runtime::Runtime::new().map_err(|e| Error::Io { path: "<runtime>".into(), source: e }.into())
}

fn curate_serve(a: crate::CurateServeArgs) -> CliResult {
    let config = rulelens_service::ServiceConfig { session_path: a.session, export_path: a.export };
    let state = rulelens_service::AppState::open(config)?;
    runtime()?.block_on(async move {
        let listener = tokio::net::TcpListener::bind(&a.addr)
            .await
            .map_err(|e| Error::Io { path: a.addr.clone().into(), source: e })?;
        let addr = listener.local_addr().map_err(|e| Error::Io { path: a.addr.into(), source: e })?;
        info!("listening on http://{addr}");
        let shutdown = async {
            let _ = tokio::signal::ctrl_c().await;
            info!("shutting down");
        };
        rulelens_service::serve(listener, state, shutdown)
            .await
            .map_err(|e| Error::Io { path: addr.to_string().into(), source: e }.into())
    })
}

fn curate(a: crate::CurateArgs) -> CliResult {
    let client = CurationClient::new(&a.url)?;
    runtime()?.block_on(async move {
        let text = match a.action {
            CurateAction::Stats => canonical::to_string(&client.stats().await?)? + "\n",
            CurateAction::Export => canonical::to_string(&client.export().await?)? + "\n",
            CurateAction::Rules { actionable, kept, reviewed, feature } => {
                let query = RuleQuery { actionable, kept, reviewed, feature, ..RuleQuery::default() };
                canonical::to_json_lines(&client.all_rules(&query).await?)?
            }
        };
        emit(None, &text)
    })
}

fn explanation_config(a: &crate::ExplainArgs) -> CliResult<ExplanationConfig> {
    let category_weights: Option<CategoryWeights> = a.weights.as_ref().map(canonical::read_json).transpose()?;
    Ok(ExplanationConfig {
        n_r: a.nr,
        algorithm: match a.algorithm {
            AlgorithmArg::Disjoint => SelectionAlgorithm::Disjoint,
            AlgorithmArg::Weighted => SelectionAlgorithm::Weighted,
        },
        show_nonactionable: !a.hide_nonactionable,
        full_view: a.full_view,
        disjoint_items: match a.disjoint_items {
            DisjointItemsArg::Actionable => DisjointItems::Actionable,
            DisjointItemsArg::All => DisjointItems::All,
        },
        category_weights,
    })
}

/// Predicted outcome per instance, in dataset order.
fn predictions(dataset: &Dataset, a: &crate::ExplainArgs) -> CliResult<Vec<String>> {
    if let (Some(path), Some(threshold)) = (&a.scores, a.threshold) {
        let scores = read_scores(path)?;
        let positive = predict(&align_scores(dataset, &scores)?, threshold);
        return Ok(predicted_values(dataset, &positive)?);
    }
    let value = match &a.predicted {
        Some(v) => v.clone(),
        None => match dataset.schema.outcome().interesting_values.as_slice() {
            [only] => only.clone(),
            _ => {
                return Err(Failure::Usage(
                    "several interesting outcome values; pass --predicted or --scores".into(),
                ))
            }
        },
    };
    Ok(vec![value; dataset.len()])
}

fn explain_patients(a: crate::ExplainArgs) -> CliResult {
    let dataset = load(&a.input)?;
    let classifier = load_classifier(&a.model, &dataset.schema)?;
    let index = ExplainIndex::new(&classifier, &dataset.schema)?;
    let config = explanation_config(&a)?;
    let predicted = predictions(&dataset, &a)?;
    let outcome = dataset.schema.outcome();

    if let Some(id) = &a.patient_id {
        let pos = dataset
            .instances
            .iter()
            .position(|inst| &inst.id == id)
            .ok_or_else(|| Error::NotFound(format!("patient `{id}`")))?;
        let report = explain(&dataset.instances[pos], &predicted[pos], &index, &config)?;
        if report.rules.is_empty() {
            info!("no rule applies to `{id}`");
        }
        return emit(a.out.as_deref(), &(canonical::to_string(&report)? + "\n"));
    }

    let reports: Vec<ExplanationReport> = dataset
        .instances
        .par_iter()
        .zip(&predicted)
        .filter(|(_, pred)| outcome.is_interesting(pred))
        .map(|(inst, pred)| explain(inst, pred, &index, &config))
        .collect::<rulelens_core::Result<_>>()?;
    info!("{} of {} patients explained", reports.len(), dataset.len());
    emit(a.out.as_deref(), &canonical::to_json_lines(&reports)?)
}

#[derive(Serialize)]
struct EvaluationReport {
    threshold: f64,
    /// `train`, `test`, or `fixed`.
    threshold_source: &'static str,
    auc: f64,
    metrics: ClassificationMetrics,
    coverage: CoverageStats,
}

fn evaluate(a: crate::EvaluateArgs) -> CliResult {
    let schema = Schema::load(&a.schema)?;
    let test = Dataset::load_csv(&a.test, &schema)?;
    let scores = read_scores(&a.scores)?;
    let test_scores = align_scores(&test, &scores)?;
    let test_labels = positive_labels(&test);

    let (threshold, threshold_source) = match (a.threshold, a.fit_on) {
        (Some(t), _) => (t, "fixed"),
        (None, FitOn::Train) => {
            let path = a
                .train
                .as_ref()
                .ok_or_else(|| Failure::Usage("fitting on training scores needs --train".into()))?;
            let train = Dataset::load_csv(path, &schema)?;
            let s = align_scores(&train, &scores)?;
            (rulelens_core::evaluator::youden_cutoff(&s, &positive_labels(&train))?, "train")
        }
        (None, FitOn::Test) => {
            warning!("cutoff fitted on the test set; metrics are optimistic");
            (rulelens_core::evaluator::youden_cutoff(&test_scores, &test_labels)?, "test")
        }
    };

    let positive = predict(&test_scores, threshold);
    let metrics = classification_metrics(&positive, &test_labels)?;
    let classifier = load_classifier(&a.model, &schema)?;
    let index = ExplainIndex::new(&classifier, &schema)?;
    let patients = patient_coverage(&test, &predicted_values(&test, &positive)?, &index)?;
    let coverage = summarize_coverage(&patients);

    if let Some(dir) = &a.figures {
        write_figures(dir, &coverage.histograms)?;
    }
    if let Some(path) = &a.patients {
        canonical::write_json_lines(path, &patients)?;
    }
    info!(
        "cutoff {} ({threshold_source}), coverage {:.4} of {} correct positives",
        canonical::format_float(threshold),
        coverage.coverage_correct_positives,
        coverage.n_correct_positives
    );
    let report = EvaluationReport {
        threshold,
        threshold_source,
        auc: auc(&test_scores, &test_labels)?,
        metrics,
        coverage,
    };
    emit(a.out.as_deref(), &(canonical::to_string_pretty(&report)? + "\n"))
}

#[derive(Serialize)]
struct KappaReport {
    kappa: f64,
    rules: usize,
}

fn kappa(a: crate::KappaArgs) -> CliResult {
    let first: BTreeMap<String, bool> = canonical::read_json(&a.a)?;
    let second: BTreeMap<String, bool> = canonical::read_json(&a.b)?;
    let report = KappaReport { kappa: cohens_kappa(&first, &second)?, rules: first.len() };
    emit(None, &(canonical::to_string(&report)? + "\n"))
}
