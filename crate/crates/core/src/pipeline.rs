//! Parse, check, compute alphabets and emit, in one call.

use thiserror::Error;

use crate::alphabet::{compute_spec_alphabets, SpecAlphabets};
use crate::analyzer::{analyze_with, AnalyzerOptions};
use crate::codegen::{emit, EmitPlan};
use crate::diag::{has_errors, Diagnostic};
use crate::model::ArchSpec;
use crate::parser::{parse_source, ParseError, Parsed};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),
    #[error("{} static error(s)", .0.iter().filter(|d| d.is_error()).count())]
    Semantic(Vec<Diagnostic>),
}

#[derive(Debug, Clone)]
pub struct Checked {
    pub spec: ArchSpec,
    pub alphabets: SpecAlphabets,
    /// Warnings only; errors abort with `PipelineError::Semantic`.
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Debug, Clone)]
pub struct Compiled {
    pub spec: ArchSpec,
    pub alphabets: SpecAlphabets,
    pub diagnostics: Vec<Diagnostic>,
    pub plan: EmitPlan,
}

/// Parse warnings, static rules, then alphabets. Alphabets are only
/// computed once the static rules pass.
pub fn check_source(src: &str, opts: AnalyzerOptions) -> Result<Checked, PipelineError> {
    check_parsed(parse_source(src)?, opts)
}

pub fn check_parsed(parsed: Parsed, opts: AnalyzerOptions) -> Result<Checked, PipelineError> {
    let mut diagnostics: Vec<Diagnostic> =
        parsed.warnings.iter().map(|w| Diagnostic::warning(w.pos, w.message.clone())).collect();
    diagnostics.extend(analyze_with(&parsed.spec, opts));
    if has_errors(&diagnostics) {
        return Err(PipelineError::Semantic(diagnostics));
    }
    let (alphabets, alpha_diags) = compute_spec_alphabets(&parsed.spec);
    diagnostics.extend(alpha_diags);
    if has_errors(&diagnostics) {
        return Err(PipelineError::Semantic(diagnostics));
    }
    Ok(Checked { spec: parsed.spec, alphabets, diagnostics })
}

pub fn compile_source(src: &str, opts: AnalyzerOptions) -> Result<Compiled, PipelineError> {
    Ok(emit_checked(check_source(src, opts)?))
}

pub fn emit_checked(checked: Checked) -> Compiled {
    let Checked { spec, alphabets, mut diagnostics } = checked;
    let (plan, emit_diags) = emit(&spec, &alphabets);
    diagnostics.extend(emit_diags);
    Compiled { spec, alphabets, diagnostics, plan }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn static_errors_stop_before_emission() {
        let src = "Configuration X Component A Port P = a -> P Computation = P.a -> Computation \
                   Instances a1 : Missing Attachments End Configuration";
        match compile_source(src, AnalyzerOptions::default()) {
            Err(PipelineError::Semantic(d)) => assert!(d.iter().any(|d| d.rule == Some(2)), "{d:?}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = compile_source("Style S Component", AnalyzerOptions::default()).unwrap_err();
        assert!(matches!(err, PipelineError::Parse(_)));
    }
}
