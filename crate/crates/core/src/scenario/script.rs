use nalgebra::DVector;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
#[error("script line {line}: {message}")]
pub struct ScriptError {
    pub line: usize,
    pub message: String,
}

/// Commanded joint velocities (rad/s), one per timestep.
#[derive(Clone, Debug, PartialEq)]
pub struct ActionScript {
    commands: Vec<DVector<f64>>,
}

impl ActionScript {
    pub fn new(commands: Vec<DVector<f64>>) -> Self {
        ActionScript { commands }
    }

    /// Parse whitespace-separated velocity vectors, one per line. Blank lines
    /// and `#` comments are ignored.
    pub fn parse(text: &str, n_joints: usize) -> Result<Self, ScriptError> {
        let mut commands = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let values = content
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| ScriptError { line, message: format!("invalid number {tok:?}") })
                })
                .collect::<Result<Vec<_>, _>>()?;
            if values.len() != n_joints {
                return Err(ScriptError {
                    line,
                    message: format!("expected {n_joints} velocities, found {}", values.len()),
                });
            }
            commands.push(DVector::from_vec(values));
        }
        Ok(ActionScript { commands })
    }

    pub fn commands(&self) -> &[DVector<f64>] {
        &self.commands
    }

    pub fn len(&self) -> usize {
        self.commands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.commands.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_blanks() {
        let s = ActionScript::parse("# header\n0.1 0.2\n\n-0.5  1e-1 # trailing\n", 2).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.commands()[1], DVector::from_vec(vec![-0.5, 0.1]));
    }

    #[test]
    fn reports_line_of_bad_arity() {
        let err = ActionScript::parse("0 0\n1 2 3\n", 2).unwrap_err();
        assert_eq!(err.line, 2);
        let err = ActionScript::parse("0 x\n", 2).unwrap_err();
        assert_eq!(err.line, 1);
    }
}
