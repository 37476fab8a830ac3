//! Plain-text `key = value` experiment specs. A spec file stands in for
//! the entire flag set of one subcommand, so an invocation is either all
//! flags or `--spec FILE`, never a mix.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};

/// Rewrite `prog sub --spec FILE` into the argv the file describes.
/// Invocations without `--spec` pass through untouched.
pub fn expand(argv: Vec<String>) -> Result<Vec<String>> {
    let Some(pos) = argv
        .iter()
        .position(|a| a == "--spec" || a.starts_with("--spec="))
    else {
        return Ok(argv);
    };
    let path = if let Some(inline) = argv[pos].strip_prefix("--spec=") {
        if pos != 2 || argv.len() != 3 {
            bail!("--spec replaces every other flag: use `topdeg <subcommand> --spec FILE`");
        }
        inline.to_string()
    } else {
        if pos != 2 || argv.len() != 4 {
            bail!("--spec replaces every other flag: use `topdeg <subcommand> --spec FILE`");
        }
        argv[3].clone()
    };
    let mut out = vec![argv[0].clone(), argv[1].clone()];
    for (key, value) in parse(Path::new(&path))? {
        out.push(format!("--{}", key.replace('_', "-")));
        out.push(value);
    }
    Ok(out)
}

/// `key = value` pairs in file order. Blank lines and `#` comments are
/// skipped; keys must be unique.
pub fn parse(path: &Path) -> Result<Vec<(String, String)>> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading spec file {}", path.display()))?;
    let mut pairs: Vec<(String, String)> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!(
                "{}:{}: expected `key = value`, got {line:?}",
                path.display(),
                idx + 1
            );
        };
        let key = key.trim();
        let value = value.trim();
        if key.is_empty()
            || !key
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        {
            bail!("{}:{}: invalid key {key:?}", path.display(), idx + 1);
        }
        if pairs.iter().any(|(k, _)| k == key) {
            bail!("{}:{}: duplicate key {key:?}", path.display(), idx + 1);
        }
        pairs.push((key.to_string(), value.to_string()));
    }
    Ok(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_spec(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    fn args(parts: &[&str]) -> Vec<String> {
        parts.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn plain_argv_passes_through() {
        let argv = args(&["topdeg", "run", "--budget", "10"]);
        assert_eq!(expand(argv.clone()).unwrap(), argv);
    }

    #[test]
    fn spec_expands_to_flags_in_file_order() {
        let f = write_spec("# comment\nbudget = 100\n\nn_v=50\nkind = pareto-log\n");
        let argv = args(&["topdeg", "run", "--spec", f.path().to_str().unwrap()]);
        assert_eq!(
            expand(argv).unwrap(),
            args(&[
                "topdeg",
                "run",
                "--budget",
                "100",
                "--n-v",
                "50",
                "--kind",
                "pareto-log"
            ])
        );
    }

    #[test]
    fn inline_form_is_accepted() {
        let f = write_spec("k = 5\n");
        let argv = args(&["topdeg", "run", &format!("--spec={}", f.path().display())]);
        assert_eq!(expand(argv).unwrap(), args(&["topdeg", "run", "--k", "5"]));
    }

    #[test]
    fn mixing_spec_with_flags_is_rejected() {
        let f = write_spec("k = 5\n");
        let path = f.path().to_str().unwrap().to_string();
        for argv in [
            args(&["topdeg", "run", "--spec", &path, "--budget", "10"]),
            args(&["topdeg", "run", "--budget", "10", "--spec", &path]),
            args(&["topdeg", "--spec", &path]),
        ] {
            let err = expand(argv).unwrap_err().to_string();
            assert!(err.contains("--spec replaces"), "{err}");
        }
    }

    #[test]
    fn malformed_lines_are_reported_with_positions() {
        let f = write_spec("budget = 10\nnonsense\n");
        let err = parse(f.path()).unwrap_err().to_string();
        assert!(err.contains(":2:"), "{err}");

        let f = write_spec("budget = 10\nbudget = 20\n");
        let err = parse(f.path()).unwrap_err().to_string();
        assert!(err.contains("duplicate key"), "{err}");

        let f = write_spec("bad key! = 3\n");
        assert!(parse(f.path()).is_err());
    }

    #[test]
    fn missing_file_is_an_error() {
        assert!(parse(Path::new("/nonexistent/spec.conf")).is_err());
    }
}
