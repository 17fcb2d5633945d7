//! Per-iteration trace tables and their deterministic text renderings.

use std::collections::BTreeSet;

use crate::mvset::MvSet;

use super::{MapSpec, MapState, MvcmError, RunStatus};

/// One trace row: a concept at an iteration of one branch (the branch `*`
/// holds values merged across branches).
#[derive(Debug, Clone)]
pub struct TraceRow {
    pub k: usize,
    pub branch: String,
    pub concept: String,
    concept_ix: usize,
    /// `(value, confidence)` label pairs in element order.
    pub values: Vec<(String, String)>,
    pub f: String,
    pub r: String,
    pub c: String,
}

/// Output format of a rendered trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenderFormat {
    Tsv,
    Markdown,
}

/// Append-only record of a run, rendered sorted by `(branch, k)`.
#[derive(Debug, Default)]
pub struct TraceTable {
    rows: Vec<TraceRow>,
    status: Option<RunStatus>,
}

fn pairs_of(set: &MvSet) -> Vec<(String, String)> {
    set.entries()
        .map(|(v, m)| {
            (
                set.carrier().label(v).unwrap_or("?").to_string(),
                set.scale().label(m).unwrap_or("?").to_string(),
            )
        })
        .collect()
}

fn braced<'a>(items: impl Iterator<Item = &'a str>) -> String {
    let mut out = String::from("{");
    for (i, item) in items.enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(item);
    }
    out.push('}');
    out
}

impl TraceTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rows(&self) -> &[TraceRow] {
        &self.rows
    }

    pub fn status(&self) -> Option<RunStatus> {
        self.status
    }

    pub(crate) fn set_status(&mut self, status: RunStatus) {
        self.status = Some(status);
    }

    pub(crate) fn record_state(&mut self, spec: &MapSpec, branch: &str, state: &MapState) {
        let label = |e| spec.carrier().label(e).unwrap_or("?").to_string();
        for i in 0..spec.len() {
            self.rows.push(TraceRow {
                k: state.k,
                branch: branch.to_string(),
                concept: spec.concept(i).to_string(),
                concept_ix: i,
                values: pairs_of(&state.values[i]),
                f: label(state.coeffs[i].f),
                r: label(state.coeffs[i].r),
                c: label(state.coeffs[i].c),
            });
        }
    }

    /// Merges the given states per concept (confidences joined) into rows of
    /// the pseudo-branch `*`; coefficient columns show the set of distinct
    /// per-branch values.
    pub(crate) fn record_merged(
        &mut self,
        spec: &MapSpec,
        k: usize,
        states: &[&MapState],
    ) -> Result<(), MvcmError> {
        let label = |e| spec.carrier().label(e).unwrap_or("?").to_string();
        for i in 0..spec.len() {
            let mut merged = states[0].values[i].clone();
            for s in &states[1..] {
                merged = merged.merged(&s.values[i])?;
            }
            let coeff_set = |pick: &dyn Fn(&MapState) -> String| {
                let set: BTreeSet<String> = states.iter().map(|s| pick(s)).collect();
                if set.len() == 1 {
                    set.into_iter().next().unwrap()
                } else {
                    braced(set.iter().map(String::as_str))
                }
            };
            self.rows.push(TraceRow {
                k,
                branch: "*".to_string(),
                concept: spec.concept(i).to_string(),
                concept_ix: i,
                values: pairs_of(&merged),
                f: coeff_set(&|s| label(s.coeffs[i].f)),
                r: coeff_set(&|s| label(s.coeffs[i].r)),
                c: coeff_set(&|s| label(s.coeffs[i].c)),
            });
        }
        Ok(())
    }

    fn sorted_rows(&self) -> Vec<&TraceRow> {
        let mut rows: Vec<&TraceRow> = self.rows.iter().collect();
        rows.sort_by(|a, b| {
            (&a.branch, a.k, a.concept_ix).cmp(&(&b.branch, b.k, b.concept_ix))
        });
        rows
    }

    fn status_line(&self) -> String {
        match self.status {
            Some(RunStatus::Converged { at }) => format!("status: converged at k={at}"),
            Some(RunStatus::NotConverged { max_iter }) => {
                format!("status: NOT CONVERGED within {max_iter} iterations")
            }
            None => "status: unknown".to_string(),
        }
    }

    /// Deterministic, byte-stable rendering.
    pub fn render(&self, format: RenderFormat) -> String {
        match format {
            RenderFormat::Tsv => self.render_tsv(),
            RenderFormat::Markdown => self.render_markdown(),
        }
    }

    fn render_tsv(&self) -> String {
        let mut out = String::from("k\tbranch\tconcept\tvalues\tconfidences\tf\tr\tc\n");
        for row in self.sorted_rows() {
            let values = braced(row.values.iter().map(|(v, _)| v.as_str()));
            let confs = braced(row.values.iter().map(|(_, m)| m.as_str()));
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                row.k, row.branch, row.concept, values, confs, row.f, row.r, row.c
            ));
        }
        out.push_str(&format!("# {}\n", self.status_line()));
        out
    }

    fn render_markdown(&self) -> String {
        let rows = self.sorted_rows();
        let branches: Vec<&String> = {
            let mut seen = BTreeSet::new();
            rows.iter()
                .filter(|r| seen.insert(&r.branch))
                .map(|r| &r.branch)
                .collect()
        };
        let mut out = String::new();
        for branch in branches {
            let branch_rows: Vec<&&TraceRow> =
                rows.iter().filter(|r| &r.branch == branch).collect();
            let ks: Vec<usize> = {
                let set: BTreeSet<usize> = branch_rows.iter().map(|r| r.k).collect();
                set.into_iter().collect()
            };
            let concepts: Vec<(usize, &str)> = {
                let mut seen = BTreeSet::new();
                branch_rows
                    .iter()
                    .filter(|r| seen.insert(r.concept_ix))
                    .map(|r| (r.concept_ix, r.concept.as_str()))
                    .collect()
            };
            let title = if branch == "*" {
                "merged across branches".to_string()
            } else {
                format!("branch {branch}")
            };
            out.push_str(&format!("## {title}\n\n"));
            let cell = |ix: usize, k: usize, pick: &dyn Fn(&TraceRow) -> String| {
                branch_rows
                    .iter()
                    .find(|r| r.concept_ix == ix && r.k == k)
                    .map(|r| pick(r))
                    .unwrap_or_else(|| "·".to_string())
            };
            out.push_str(&format!(
                "| concept |{}\n",
                ks.iter().map(|k| format!(" k={k} |")).collect::<String>()
            ));
            out.push_str(&format!("|---|{}\n", "---|".repeat(ks.len())));
            for &(ix, name) in &concepts {
                let mut line = format!("| {name} |");
                for &k in &ks {
                    let text = cell(ix, k, &|r| {
                        if r.values.is_empty() {
                            "-".to_string()
                        } else {
                            r.values
                                .iter()
                                .map(|(v, m)| format!("({v}, {m})"))
                                .collect::<Vec<_>>()
                                .join(" ")
                        }
                    });
                    line.push_str(&format!(" {text} |"));
                }
                out.push_str(&line);
                out.push('\n');
            }
            out.push_str(&format!("\n### coefficients (f; r; c), {title}\n\n"));
            out.push_str(&format!(
                "| concept |{}\n",
                ks.iter().map(|k| format!(" k={k} |")).collect::<String>()
            ));
            out.push_str(&format!("|---|{}\n", "---|".repeat(ks.len())));
            for &(ix, name) in &concepts {
                let mut line = format!("| {name} |");
                for &k in &ks {
                    let text = cell(ix, k, &|r| format!("{}; {}; {}", r.f, r.r, r.c));
                    line.push_str(&format!(" {text} |"));
                }
                out.push_str(&line);
                out.push('\n');
            }
            out.push('\n');
        }
        out.push_str(&format!("{}\n", self.status_line()));
        out
    }
}
