use serde::{Deserialize, Serialize};

use super::{check_distinct, lyapunov_sufficient, solve_alpha, LyapunovSufficiency, ModelSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionCheck {
    /// `"T-1"` .. `"T-8"`
    pub id: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub accepted: bool,
    /// Marginal index per coordinate; `None` when no root exists.
    pub alpha: Vec<Option<f64>>,
    pub conditions: Vec<ConditionCheck>,
    /// Sufficient-condition evidence for a negative top Lyapunov exponent,
    /// evaluated at `eps = 0.5 min alpha_i` when all indices exist.
    pub lyapunov: Option<LyapunovSufficiency>,
    pub diagnostics: Vec<String>,
}

impl ValidationReport {
    pub fn condition(&self, id: &str) -> Option<&ConditionCheck> {
        self.conditions.iter().find(|c| c.id == id)
    }

    pub fn failed(&self) -> impl Iterator<Item = &ConditionCheck> {
        self.conditions.iter().filter(|c| !c.passed)
    }
}

fn push(conditions: &mut Vec<ConditionCheck>, id: &str, problems: Vec<String>, ok_detail: &str) {
    let passed = problems.is_empty();
    let detail = if passed { ok_detail.to_string() } else { problems.join("; ") };
    conditions.push(ConditionCheck { id: id.to_string(), passed, detail });
}

/// Evaluates the standing conditions T-1 to T-8 entry by entry. Failures are report entries.
pub fn validate(spec: &ModelSpec) -> ValidationReport {
    let d = spec.dim();
    let mut conditions = Vec::with_capacity(8);
    let mut diagnostics = Vec::new();

    // T-1: every built-in law lives on [0, inf).
    push(&mut conditions, "T-1", Vec::new(), "all entries of A and B are nonnegative laws");

    let t2 = (0..d)
        .filter(|&i| spec.b(i).is_zero())
        .map(|i| format!("B[{}] = {} is zero almost surely", i + 1, spec.b(i)))
        .collect();
    push(&mut conditions, "T-2", t2, "P(B_i = 0) < 1 for every i");

    let t3 = (0..d)
        .flat_map(|i| (0..i).map(move |j| (i, j)))
        .filter(|&(i, j)| spec.is_positive(i, j))
        .map(|(i, j)| format!("A[{}][{}] is below the diagonal", i + 1, j + 1))
        .collect();
    push(&mut conditions, "T-3", t3, "A is upper triangular");

    let roots: Vec<_> = (0..d).map(|i| solve_alpha(spec.diag(i))).collect();
    let alpha: Vec<Option<f64>> = roots.iter().map(|r| r.as_ref().ok().copied()).collect();
    let mut t4: Vec<String> = roots
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.as_ref().err().map(|e| format!("A[{}][{}]: {e}", i + 1, i + 1)))
        .collect();
    let all_alpha: Option<Vec<f64>> = alpha.iter().cloned().collect();
    if let Some(a) = &all_alpha {
        if let Err(e) = check_distinct(a) {
            t4.push(e.to_string());
        }
    }
    push(&mut conditions, "T-4", t4, "E A_ii^alpha_i = 1 has distinct roots");

    let mut t5 = Vec::new();
    for i in 0..d {
        for j in 0..d {
            let Some(entry) = spec.a(i, j) else { continue };
            match alpha[i] {
                Some(a) if entry.moment(a).is_finite() => {}
                Some(a) => t5.push(format!("E A[{}][{}]^{a} diverges", i + 1, j + 1)),
                None if i != j => t5.push(format!("alpha_{} unavailable for A[{}][{}]", i + 1, i + 1, j + 1)),
                None => {}
            }
        }
    }
    push(&mut conditions, "T-5", t5, "E A_ij^alpha_i < inf");

    let t6 = (0..d)
        .filter_map(|i| match alpha[i] {
            Some(a) if spec.b(i).moment(a).is_finite() => None,
            Some(a) => Some(format!("E B[{}]^{a} diverges", i + 1)),
            None => Some(format!("alpha_{} unavailable", i + 1)),
        })
        .collect();
    push(&mut conditions, "T-6", t6, "E B_i^alpha_i < inf");

    let t7 = (0..d)
        .filter_map(|i| match alpha[i] {
            Some(a) => match spec.diag(i).log_moment(a) {
                Ok(v) if v.is_finite() => None,
                Ok(v) => Some(format!("E[A_ii^alpha log A_ii] = {v} for i = {}", i + 1)),
                Err(e) => Some(format!("A[{}][{}]: {e}", i + 1, i + 1)),
            },
            None => Some(format!("alpha_{} unavailable", i + 1)),
        })
        .collect();
    push(&mut conditions, "T-7", t7, "E[A_ii^alpha_i log+ A_ii] < inf");

    let t8 = (0..d)
        .filter(|&i| spec.diag(i).is_arithmetic())
        .map(|i| format!("log A[{}][{}] is arithmetic ({})", i + 1, i + 1, spec.diag(i)))
        .collect();
    push(&mut conditions, "T-8", t8, "log A_ii is non-arithmetic");

    let lyapunov = all_alpha.as_ref().and_then(|a| {
        let eps = 0.5 * a.iter().cloned().fold(f64::INFINITY, f64::min);
        match lyapunov_sufficient(spec, eps) {
            Ok(r) => Some(r),
            Err(e) => {
                diagnostics.push(format!("lyapunov check: {e}"));
                None
            }
        }
    });
    let lyap_ok = lyapunov.as_ref().is_some_and(|l| l.sufficient);
    if !lyap_ok {
        diagnostics.push("no evidence of a negative top Lyapunov exponent".into());
    }
    for c in conditions.iter().filter(|c| !c.passed) {
        diagnostics.push(format!("{} failed: {}", c.id, c.detail));
    }
    let accepted = conditions.iter().all(|c| c.passed) && lyap_ok;
    ValidationReport { accepted, alpha, conditions, lyapunov, diagnostics }
}
