//! Reports: a command echo, titled sections of items, and a verdict.
//! Rendering is deterministic except for the final timing line.

use serde::Serialize;

use reldiff::coeffield::FieldDescriptor;
use reldiff::dvariety::{CheckReport, ResidualCheck, Verdict};
use reldiff::expr::format_rat;
use reldiff::poly::{MultiIndex, Rat};
use reldiff::reduce::{AutoreducedSet, ReductionCertificate};

pub fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "pass",
        Verdict::Fail => "fail",
        Verdict::Inconclusive => "inconclusive",
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateOut {
    /// `(initial power, separant power)` per element of the set.
    pub exponents: Vec<(u32, u32)>,
    pub unit: String,
    pub multiplier: String,
    /// `(element, operator, cofactor)`, element 1-based.
    pub combination: Vec<(usize, String, String)>,
    pub remainder: String,
    pub replayed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Item {
    pub label: String,
    pub value: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateOut>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Section {
    pub title: String,
    pub items: Vec<Item>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub sections: Vec<Section>,
    pub verdict: &'static str,
    pub timing_ms: u128,
    #[serde(skip)]
    pub outcome: Verdict,
}

impl Report {
    pub fn new(command: impl Into<String>) -> Self {
        Report {
            command: command.into(),
            sections: Vec::new(),
            verdict: "pass",
            timing_ms: 0,
            outcome: Verdict::Pass,
        }
    }

    pub fn section(&mut self, title: impl Into<String>) -> &mut Section {
        self.sections.push(Section {
            title: title.into(),
            items: Vec::new(),
        });
        self.sections.last_mut().expect("just pushed")
    }

    pub fn merge_verdict(&mut self, v: Verdict) {
        self.outcome = self.outcome.combine(v);
        self.verdict = verdict_name(self.outcome);
    }

    pub fn render_text(&self) -> String {
        let mut out = format!("command: {}\n", self.command);
        for s in &self.sections {
            out.push_str(&format!("== {} ==\n", s.title));
            for it in &s.items {
                match it.verdict {
                    Some(v) => out.push_str(&format!("  [{v}] {}: {}\n", it.label, it.value)),
                    None => out.push_str(&format!("  {}: {}\n", it.label, it.value)),
                }
                if let Some(c) = &it.certificate {
                    out.push_str(&format!(
                        "      certificate: multiplier {}; exponents {}; remainder {}; replayed {}\n",
                        c.multiplier,
                        exponents(&c.exponents),
                        c.remainder,
                        if c.replayed { "yes" } else { "no" }
                    ));
                    for (k, theta, cof) in &c.combination {
                        out.push_str(&format!("        + ({cof}) * {theta}(A{k})\n"));
                    }
                }
            }
        }
        out.push_str(&format!("verdict: {}\n", self.verdict));
        out.push_str(&format!("time: {} ms\n", self.timing_ms));
        out
    }
}

fn exponents(e: &[(u32, u32)]) -> String {
    if e.is_empty() {
        return "none".to_string();
    }
    e.iter()
        .map(|(a, b)| format!("({a},{b})"))
        .collect::<Vec<_>>()
        .join(" ")
}

impl Section {
    pub fn value(&mut self, label: impl Into<String>, value: impl Into<String>) {
        self.items.push(Item {
            label: label.into(),
            value: value.into(),
            verdict: None,
            certificate: None,
        });
    }

    pub fn check(&mut self, label: impl Into<String>, value: impl Into<String>, v: Verdict) {
        self.items.push(Item {
            label: label.into(),
            value: value.into(),
            verdict: Some(verdict_name(v)),
            certificate: None,
        });
    }

    pub fn residual(&mut self, field: &FieldDescriptor, set: &AutoreducedSet, c: &ResidualCheck) {
        self.items.push(Item {
            label: c.label.clone(),
            value: format!("residual {}", format_rat(&c.residual, field)),
            verdict: Some(verdict_name(c.verdict)),
            certificate: Some(certificate(field, set, &c.residual, &c.certificate)),
        });
    }

    pub fn residuals(&mut self, field: &FieldDescriptor, set: &AutoreducedSet, r: &CheckReport) {
        if r.checks.is_empty() {
            self.value("checks", "none required");
        }
        for c in &r.checks {
            self.residual(field, set, c);
        }
    }
}

pub fn theta_name(field: &FieldDescriptor, t: &MultiIndex) -> String {
    if t.is_identity() {
        return "id".to_string();
    }
    t.powers()
        .map(|(k, e)| {
            let name = &field.derivations()[k].name;
            if e == 1 {
                format!("d[{name}]")
            } else {
                format!("d[{name}]^{e}")
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn certificate(
    field: &FieldDescriptor,
    set: &AutoreducedSet,
    f: &Rat,
    c: &ReductionCertificate,
) -> CertificateOut {
    let show = |p: &reldiff::poly::Poly| format_rat(&Rat::from_poly(p.clone()), field);
    CertificateOut {
        exponents: c.exponents.clone(),
        unit: show(&c.unit),
        multiplier: show(&c.multiplier(set)),
        combination: c
            .combination
            .iter()
            .map(|((k, t), cof)| (k + 1, theta_name(field, t), show(cof)))
            .collect(),
        remainder: show(&c.remainder),
        replayed: c.replay(field, f.numer(), set),
    }
}
