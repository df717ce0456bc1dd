//! Report emission: feature tables, per-condition results, summary,
//! predictions, exclusion log, Friedman output and the scatter figure.
//! Every function renders to a `String`; callers decide where it goes.

use std::fmt::Write as _;

use crate::dataset::{Extracted, Group, Modality, Reconciled, SubjectFeatures};
use crate::error::{Error, Result};
use crate::eval::{EvaluationReport, FriedmanResult};
use crate::regress::ModelFamily;

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn render(rows: Vec<Vec<String>>) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

fn feature_table<const N: usize>(
    names: &[&str; N],
    subjects: &[SubjectFeatures],
    pick: impl Fn(&SubjectFeatures) -> &std::collections::BTreeMap<u32, Extracted<N>>,
) -> String {
    let mut rows = vec![["subject", "rep"].iter().chain(names.iter()).map(|s| s.to_string()).collect()];
    for s in subjects {
        for (rep, row) in pick(s) {
            let Ok(row) = row else { continue };
            let mut r = vec![s.record.subject_id.clone(), rep.to_string()];
            r.extend(row.values().iter().map(|v| opt(*v)));
            rows.push(r);
        }
    }
    render(rows)
}

/// One row per extracted repetition; missing features are empty cells.
/// Repetitions that produced no feature row at all are left out (they
/// appear in the exclusion log).
pub fn audio_features_csv(subjects: &[SubjectFeatures]) -> String {
    feature_table(&crate::audio::AUDIO_FEATURE_NAMES, subjects, |s| &s.audio)
}

pub fn video_features_csv(subjects: &[SubjectFeatures]) -> String {
    feature_table(&crate::video::VIDEO_FEATURE_NAMES, subjects, |s| &s.video)
}

/// Counts per modality followed by one tab-separated line per exclusion.
/// For each modality, annotated = modeled + excluded.
pub fn exclusions_log(reconciled: &[(Modality, &Reconciled)]) -> String {
    let mut out = String::from("# modality\tannotated\tmodeled\texcluded\n");
    for (m, r) in reconciled {
        let (n, x) = (r.instances.len(), r.exclusions.len());
        writeln!(out, "# {m}\t{}\t{n}\t{x}", n + x).unwrap();
    }
    for (_, r) in reconciled {
        for e in &r.exclusions {
            writeln!(out, "{e}").unwrap();
        }
    }
    out
}

pub fn report_file_name(modality: Modality, family: ModelFamily) -> String {
    format!("report_{modality}_{family}.csv")
}

/// Per-subject results of one (modality, model) condition.
pub fn report_csv(report: &EvaluationReport) -> String {
    let mut rows = vec![["subject", "group", "n_reps", "rmse", "inner_score", "grid_index", "spec"]
        .map(String::from)
        .to_vec()];
    for (s, fold) in report.subjects.iter().zip(&report.folds) {
        debug_assert_eq!(s.subject_id, fold.subject_id);
        rows.push(vec![
            s.subject_id.clone(),
            s.group.to_string(),
            s.n_reps.to_string(),
            s.rmse.to_string(),
            fold.inner_score.to_string(),
            fold.grid_index.to_string(),
            fold.spec.to_string(),
        ]);
    }
    render(rows)
}

/// Subject RMSEs read back from a [`report_csv`] file.
pub fn parse_report_csv(text: &str, context: &str) -> Result<Vec<(String, f64)>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let parse_err = |message: String| Error::Parse { context: context.to_string(), message };
    let headers = r.headers().map_err(|e| parse_err(e.to_string()))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| parse_err(format!("missing column {name:?}")))
    };
    let (subject, rmse) = (col("subject")?, col("rmse")?);
    let mut out = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| parse_err(e.to_string()))?;
        let v: f64 = rec[rmse]
            .parse()
            .map_err(|_| parse_err(format!("row {}: invalid rmse {:?}", k + 2, &rec[rmse])))?;
        out.push((rec[subject].to_string(), v));
    }
    Ok(out)
}

/// One row per condition, in the order given.
pub fn summary_csv(reports: &[EvaluationReport]) -> String {
    let mut rows = vec![["modality", "model", "n_subjects", "mrmse", "mrmse_als", "mrmse_hc", "cv_als", "cv_hc"]
        .map(String::from)
        .to_vec()];
    for r in reports {
        rows.push(vec![
            r.modality.to_string(),
            r.family.to_string(),
            r.subjects.len().to_string(),
            r.mrmse.to_string(),
            opt(r.mrmse_als),
            opt(r.mrmse_hc),
            opt(r.cv_als),
            opt(r.cv_hc),
        ]);
    }
    render(rows)
}

pub fn predictions_csv(reports: &[EvaluationReport]) -> String {
    let mut rows = vec![["modality", "model", "subject", "group", "rep", "y_true", "y_pred"].map(String::from).to_vec()];
    for r in reports {
        for f in &r.folds {
            for p in &f.predictions {
                rows.push(vec![
                    r.modality.to_string(),
                    r.family.to_string(),
                    f.subject_id.clone(),
                    f.group.to_string(),
                    p.rep.to_string(),
                    p.y_true.to_string(),
                    p.y_pred.to_string(),
                ]);
            }
        }
    }
    render(rows)
}

pub fn friedman_csv(result: &FriedmanResult, conditions: &[String], subjects: &[String]) -> String {
    render(vec![
        ["chi2", "df", "p", "n_blocks", "n_treatments", "conditions", "subjects"].map(String::from).to_vec(),
        vec![
            result.chi2.to_string(),
            result.df.to_string(),
            result.p.to_string(),
            result.n_blocks.to_string(),
            result.n_treatments.to_string(),
            conditions.join(";"),
            subjects.join(";"),
        ],
    ])
}

/// One point of the scatter figure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatterPoint {
    pub y_true: f64,
    pub y_pred: f64,
    pub group: Group,
}

const PLOT: f64 = 400.0;
const MARGIN: f64 = 60.0;

fn colour(g: Group) -> &'static str {
    match g {
        Group::Als => "red",
        Group::Hc => "blue",
    }
}

/// True versus predicted scores: one `<circle>` per point, ALS red and HC
/// blue, and one `<line>` for the identity. Both axes share the score
/// range (5–25, widened to cover the data), and markers are drawn in a
/// frame where equal true and predicted values give equal coordinates.
pub fn scatter_svg(points: &[ScatterPoint], title: &str) -> Result<String> {
    if points.is_empty() {
        return Err(Error::EmptyDataset("scatter plot needs at least one prediction".into()));
    }
    if points.iter().any(|p| !p.y_true.is_finite() || !p.y_pred.is_finite()) {
        return Err(Error::Validation("scatter plot values must be finite".into()));
    }
    let (mut lo, mut hi) = (5.0f64, 25.0f64);
    for p in points {
        lo = lo.min(p.y_true.min(p.y_pred));
        hi = hi.max(p.y_true.max(p.y_pred));
    }
    let (lo, hi) = (lo.floor(), hi.ceil());
    let k = PLOT / (hi - lo);
    let at = |v: f64| (v - lo) * k;
    let size = PLOT + 2.0 * MARGIN;

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, size / 2.0, escape(title)).unwrap();
    writeln!(s, r#"<g transform="translate({MARGIN} {}) scale(1 -1)">"#, MARGIN + PLOT).unwrap();
    // Axes and ticks as one path so the only <line> is the identity.
    let mut axes = format!("M0 {PLOT} V0 H{PLOT}");
    let step = if hi - lo > 40.0 { 10.0 } else { 5.0 };
    let mut ticks = Vec::new();
    let mut t = (lo / step).ceil() * step;
    while t <= hi + 1e-9 {
        write!(axes, " M{0:.3} 0 v-5 M0 {0:.3} h-5", at(t)).unwrap();
        ticks.push(t);
        t += step;
    }
    writeln!(s, r#"<path d="{axes}" fill="none" stroke="black"/>"#).unwrap();
    writeln!(
        s,
        r#"<line x1="0" y1="0" x2="{PLOT:.3}" y2="{PLOT:.3}" stroke="gray" stroke-dasharray="4 4"/>"#
    )
    .unwrap();
    for p in points {
        writeln!(
            s,
            r#"<circle cx="{:.3}" cy="{:.3}" r="3" fill="{}" fill-opacity="0.7"/>"#,
            at(p.y_true),
            at(p.y_pred),
            colour(p.group)
        )
        .unwrap();
    }
    s.push_str("</g>\n");
    for t in ticks {
        writeln!(s, r#"<text x="{:.3}" y="{}" text-anchor="middle">{t}</text>"#, MARGIN + at(t), MARGIN + PLOT + 20.0)
            .unwrap();
        writeln!(s, r#"<text x="{}" y="{:.3}" text-anchor="end">{t}</text>"#, MARGIN - 8.0, MARGIN + PLOT - at(t) + 4.0)
            .unwrap();
    }
    writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">true score ({lo}–{hi})</text>"#,
        size / 2.0,
        size - 12.0
    )
    .unwrap();
    writeln!(
        s,
        r#"<text transform="translate(16 {0}) rotate(-90)" text-anchor="middle">predicted score ({lo}–{hi})</text>"#,
        size / 2.0
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="{0}" y="{1}" fill="red">● ALS</text><text x="{0}" y="{2}" fill="blue">● HC</text>"#,
        MARGIN + 8.0,
        MARGIN + 14.0,
        MARGIN + 30.0
    )
    .unwrap();
    s.push_str("</svg>\n");
    Ok(s)
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Points of one evaluated condition.
pub fn scatter_points(report: &EvaluationReport) -> Vec<ScatterPoint> {
    report
        .folds
        .iter()
        .flat_map(|f| f.predictions.iter().map(move |p| ScatterPoint { y_true: p.y_true, y_pred: p.y_pred, group: f.group }))
        .collect()
}
