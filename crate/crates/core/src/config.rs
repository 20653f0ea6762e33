//! Flat `key = value` configuration.
//!
//! ```text
//! # thresholds
//! tau_link = 0.25
//! theta_cluster = 0.34
//! cross_slot = false
//! lexicon_dir = /path/to/lexicons
//! ```

use std::path::PathBuf;

use thiserror::Error;

/// Environment variable naming a directory of lexicon files.
pub const LEXICON_DIR_ENV: &str = "TEAMTRACE_LEXICON_DIR";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("config line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("config key {key}: value {value} is outside [0, 1]")]
    OutOfRange { key: String, value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    /// Minimum match score for an antecedent link.
    pub tau_link: f64,
    /// Candidates within this margin of the best score become ambiguous links.
    pub eps_margin: f64,
    /// Single-linkage threshold for grouping high-level ideas.
    pub theta_cluster: f64,
    /// Question/answer pairs scoring below this are flagged.
    pub tau_qa: f64,
    /// Same-member explanations scoring at least this are flagged as repeats.
    pub repeated_explanation: f64,
    /// Scenario heuristic: share of problem roles implying no prior solutions.
    pub problem_share: f64,
    /// Scenario heuristic: share of solution explanations implying complete solutions.
    pub solution_share: f64,
    /// Scenario heuristic: maximum question share for complete solutions.
    pub question_share: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            tau_link: 0.25,
            eps_margin: 0.10,
            theta_cluster: 0.34,
            tau_qa: 0.20,
            repeated_explanation: 0.60,
            problem_share: 0.40,
            solution_share: 0.50,
            question_share: 0.10,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    pub thresholds: Thresholds,
    pub cross_slot: bool,
    pub lexicon_dir: Option<PathBuf>,
}

impl Config {
    /// Parses a config file on top of the defaults.
    pub fn parse(text: &str) -> Result<Config, ConfigError> {
        let mut config = Config::default();
        config.apply(text)?;
        Ok(config)
    }

    /// Applies `key = value` lines over the current values.
    pub fn apply(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line,
                message: format!("expected key = value, found {content:?}"),
            })?;
            self.set(key.trim(), value.trim()).map_err(|e| match e {
                ConfigError::Syntax { message, .. } => ConfigError::Syntax { line, message },
                other => other,
            })?;
        }
        Ok(())
    }

    /// Sets one key; used for config files and command-line overrides alike.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let t = &mut self.thresholds;
        let slot = match key {
            "tau_link" => &mut t.tau_link,
            "eps_margin" => &mut t.eps_margin,
            "theta_cluster" => &mut t.theta_cluster,
            "tau_qa" => &mut t.tau_qa,
            "repeated_explanation" => &mut t.repeated_explanation,
            "problem_share" => &mut t.problem_share,
            "solution_share" => &mut t.solution_share,
            "question_share" => &mut t.question_share,
            "cross_slot" => {
                self.cross_slot = match value {
                    "true" => true,
                    "false" => false,
                    _ => return Err(syntax(format!("cross_slot expects true or false, found {value:?}"))),
                };
                return Ok(());
            }
            "lexicon_dir" => {
                if value.is_empty() {
                    return Err(syntax("lexicon_dir is empty"));
                }
                self.lexicon_dir = Some(PathBuf::from(value));
                return Ok(());
            }
            other => return Err(syntax(format!("unknown key {other:?}"))),
        };
        let parsed: f64 = value
            .parse()
            .map_err(|_| syntax(format!("{key} expects a number, found {value:?}")))?;
        if !(0.0..=1.0).contains(&parsed) {
            return Err(ConfigError::OutOfRange { key: key.to_string(), value: parsed });
        }
        *slot = parsed;
        Ok(())
    }
}

fn syntax(message: impl Into<String>) -> ConfigError {
    ConfigError::Syntax { line: 0, message: message.into() }
}
