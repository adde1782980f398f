use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use crate::molgraph::MolGraph;

/// An external key generator (for example a standard-InChI executable run
/// with `-STDIO -Key`). The graph is written to its standard input as a
/// MOL file; the last non-empty line of standard output is the key.
#[derive(Debug, Clone)]
pub struct ExternalKeyTool {
    pub program: PathBuf,
    pub args: Vec<String>,
    pub timeout: Duration,
}

impl ExternalKeyTool {
    pub fn new(program: impl Into<PathBuf>) -> Self {
        ExternalKeyTool {
            program: program.into(),
            args: Vec::new(),
            timeout: Duration::from_secs(30),
        }
    }

    pub fn with_args(mut self, args: impl IntoIterator<Item = impl Into<String>>) -> Self {
        self.args = args.into_iter().map(Into::into).collect();
        self
    }

    /// `None` when the tool is missing, fails, times out or prints nothing.
    pub fn key(&self, g: &MolGraph) -> Option<String> {
        let input = crate::molfile::write_molfile(g);
        let mut child = Command::new(&self.program)
            .args(&self.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .ok()?;
        let mut stdin = child.stdin.take()?;
        let writer = std::thread::spawn(move || stdin.write_all(input.as_bytes()));
        let mut stdout = child.stdout.take()?;
        let reader = std::thread::spawn(move || {
            let mut out = String::new();
            stdout.read_to_string(&mut out).map(|_| out)
        });
        let deadline = Instant::now() + self.timeout;
        let status = loop {
            match child.try_wait() {
                Ok(Some(status)) => break status,
                Ok(None) if Instant::now() < deadline => {
                    std::thread::sleep(Duration::from_millis(5))
                }
                _ => {
                    let _ = child.kill();
                    let _ = child.wait();
                    log::warn!("key tool {} timed out", self.program.display());
                    return None;
                }
            }
        };
        let _ = writer.join();
        let out = reader.join().ok()?.ok()?;
        if !status.success() {
            return None;
        }
        let line = out.lines().map(str::trim).rfind(|l| !l.is_empty())?;
        let key = line.strip_prefix("InChIKey=").unwrap_or(line).trim();
        (!key.is_empty()).then(|| key.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::notation::parse_smiles;

    #[test]
    fn missing_tool_gives_none() {
        let t = ExternalKeyTool::new("/nonexistent/key-tool");
        assert_eq!(t.key(&parse_smiles("C").unwrap()), None);
    }

    #[cfg(unix)]
    #[test]
    fn last_line_is_the_key() {
        let t = ExternalKeyTool::new("sh").with_args(["-c", "cat >/dev/null; echo noise; echo InChIKey=ABC-DEF"]);
        assert_eq!(t.key(&parse_smiles("C").unwrap()).as_deref(), Some("ABC-DEF"));
        let t = ExternalKeyTool::new("sh").with_args(["-c", "cat >/dev/null; exit 3"]);
        assert_eq!(t.key(&parse_smiles("C").unwrap()), None);
    }
}
