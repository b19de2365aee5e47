//! Run reports: declaration summaries, query results, sampling
//! comparisons and invariant checks, emitted as JSON or an aligned text
//! table. Reports contain nothing run-dependent beyond the declared seed,
//! so identical configs produce byte-identical output.

use serde::Serialize;

use crate::harness::config::ComplexMatrixDef;

#[derive(Debug, Clone, Serialize)]
pub struct Declaration {
    pub kind: String,
    pub name: String,
    pub summary: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub residual: f64,
    pub bound: f64,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ResultEntry {
    Distribution {
        source: String,
        labels: Vec<String>,
        probabilities: Vec<f64>,
    },
    Value {
        source: String,
        event: Vec<String>,
        values: Vec<f64>,
    },
    Posterior {
        source: String,
        event: Vec<String>,
        probability: f64,
        labels: Vec<String>,
        probabilities: Vec<f64>,
    },
    Mean {
        source: String,
        vector: Vec<f64>,
    },
    Born {
        source: String,
        event: Vec<String>,
        probability: f64,
    },
    StateUpdate {
        source: String,
        event: Vec<String>,
        probability: f64,
        matrix: ComplexMatrixDef,
    },
    Composed {
        name: String,
        outcomes: Vec<String>,
    },
    Sampling {
        source: String,
        trials: usize,
        seed: u64,
        labels: Vec<String>,
        analytic: Vec<f64>,
        empirical: Vec<f64>,
        z_scores: Vec<f64>,
        max_abs_z: f64,
        bound: f64,
        passed: bool,
    },
}

impl ResultEntry {
    pub fn passed(&self) -> bool {
        match self {
            ResultEntry::Sampling { passed, .. } => *passed,
            _ => true,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub seed: u64,
    pub trials: usize,
    pub declarations: Vec<Declaration>,
    pub results: Vec<ResultEntry>,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

impl Report {
    pub fn to_json_string(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serialization");
        text.push('\n');
        text
    }

    pub fn to_table_string(&self) -> String {
        let mut out = String::new();
        let push = |out: &mut String, line: String| {
            out.push_str(&line);
            out.push('\n');
        };
        push(
            &mut out,
            format!("seed {}  trials {}", self.seed, self.trials),
        );
        push(&mut out, String::new());

        push(&mut out, "DECLARATIONS".into());
        let kind_w = self
            .declarations
            .iter()
            .map(|d| d.kind.len())
            .max()
            .unwrap_or(4);
        let name_w = self
            .declarations
            .iter()
            .map(|d| d.name.len())
            .max()
            .unwrap_or(4);
        for d in &self.declarations {
            push(
                &mut out,
                format!("  {:kind_w$}  {:name_w$}  {}", d.kind, d.name, d.summary),
            );
        }
        push(&mut out, String::new());

        if !self.results.is_empty() {
            push(&mut out, "RESULTS".into());
            for entry in &self.results {
                match entry {
                    ResultEntry::Distribution {
                        source,
                        labels,
                        probabilities,
                    } => {
                        push(
                            &mut out,
                            format!(
                                "  [distribution] {source}: {}",
                                pairs(labels, probabilities)
                            ),
                        );
                    }
                    ResultEntry::Value {
                        source,
                        event,
                        values,
                    } => {
                        push(
                            &mut out,
                            format!(
                                "  [value] {source} on {{{}}}: {}",
                                event.join(", "),
                                floats(values)
                            ),
                        );
                    }
                    ResultEntry::Posterior {
                        source,
                        event,
                        probability,
                        labels,
                        probabilities,
                    } => {
                        push(
                            &mut out,
                            format!(
                                "  [posterior] {source} | event {{{}}} p={:.6} | {}",
                                event.join(", "),
                                probability,
                                pairs(labels, probabilities)
                            ),
                        );
                    }
                    ResultEntry::Mean { source, vector } => {
                        push(&mut out, format!("  [mean] {source}: ({})", floats(vector)));
                    }
                    ResultEntry::Born {
                        source,
                        event,
                        probability,
                    } => {
                        push(
                            &mut out,
                            format!(
                                "  [born] {source} | event {{{}}} p={:.6}",
                                event.join(", "),
                                probability
                            ),
                        );
                    }
                    ResultEntry::StateUpdate {
                        source,
                        event,
                        probability,
                        matrix,
                    } => {
                        push(
                            &mut out,
                            format!(
                                "  [update] {source} | event {{{}}} p={:.6}",
                                event.join(", "),
                                probability
                            ),
                        );
                        for row in matrix {
                            let cells: Vec<String> = row
                                .iter()
                                .map(|[re, im]| format!("{re:+.6}{im:+.6}i"))
                                .collect();
                            push(&mut out, format!("      [{}]", cells.join(", ")));
                        }
                    }
                    ResultEntry::Composed { name, outcomes } => {
                        push(
                            &mut out,
                            format!("  [composed] {name}: {} outcomes", outcomes.len()),
                        );
                    }
                    ResultEntry::Sampling {
                        source,
                        trials,
                        seed,
                        labels,
                        analytic,
                        empirical,
                        z_scores,
                        max_abs_z,
                        bound,
                        passed,
                    } => {
                        push(
                            &mut out,
                            format!(
                                "  [sampling] {source}: n={trials} seed={seed} max|z|={max_abs_z:.3} bound={bound} {}",
                                verdict(*passed)
                            ),
                        );
                        for (((label, a), e), z) in
                            labels.iter().zip(analytic).zip(empirical).zip(z_scores)
                        {
                            push(
                                &mut out,
                                format!(
                                    "      {label}: analytic={a:.6} empirical={e:.6} z={z:+.3}"
                                ),
                            );
                        }
                    }
                }
            }
            push(&mut out, String::new());
        }

        if !self.checks.is_empty() {
            push(&mut out, "CHECKS".into());
            for check in &self.checks {
                push(
                    &mut out,
                    format!(
                        "  [{}] residual={:.3e} bound={:.1e} {} {}",
                        check.name,
                        check.residual,
                        check.bound,
                        verdict(check.passed),
                        check.detail
                    ),
                );
            }
            push(&mut out, String::new());
        }

        push(&mut out, format!("RESULT: {}", verdict(self.passed)));
        out
    }
}

fn verdict(passed: bool) -> &'static str {
    if passed {
        "PASS"
    } else {
        "FAIL"
    }
}

fn pairs(labels: &[String], values: &[f64]) -> String {
    labels
        .iter()
        .zip(values)
        .map(|(l, v)| format!("{l}={v:.6}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn floats(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| format!("{v:.6}"))
        .collect::<Vec<_>>()
        .join(", ")
}
