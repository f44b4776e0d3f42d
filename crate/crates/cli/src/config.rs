//! `--config` files: one `key=value` per line, `#` comments. Keys are long
//! flag names; entries are appended to the command line unless the flag is
//! already present, so explicit flags win.

use halasz_core::{LabError, Result};

fn parse_config(text: &str, path: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| LabError::Parse(format!("{path}:{}: expected key=value, got `{line}`", i + 1)))?;
        let key = k.trim().trim_start_matches("--").replace('_', "-");
        if key.is_empty() || key == "config" {
            return Err(LabError::Parse(format!("{path}:{}: bad key `{}`", i + 1, k.trim())));
        }
        out.push((key, v.trim().to_string()));
    }
    Ok(out)
}

fn flag_value(args: &[String], name: &str) -> Option<String> {
    let long = format!("--{name}");
    let eq = format!("--{name}=");
    args.iter().enumerate().find_map(|(i, a)| {
        if a == &long {
            args.get(i + 1).cloned()
        } else {
            a.strip_prefix(&eq).map(str::to_string)
        }
    })
}

fn has_flag(args: &[String], name: &str) -> bool {
    let long = format!("--{name}");
    let eq = format!("--{name}=");
    args.iter().any(|a| a == &long || a.starts_with(&eq))
}

/// The command line with config entries appended.
pub fn merged_args(args: Vec<String>) -> Result<Vec<String>> {
    let Some(path) = flag_value(&args, "config") else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path).map_err(|e| LabError::Parse(format!("{path}: {e}")))?;
    let mut out = args;
    for (k, v) in parse_config(&text, &path)? {
        if !has_flag(&out, &k) {
            out.push(format!("--{k}={v}"));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn explicit_flags_win() {
        let dir = std::env::temp_dir().join(format!("halasz-cfg-{}", std::process::id()));
        std::fs::write(&dir, "# defaults\nx = 1e4\nspec=moebius\npmax=5000\n").unwrap();
        let args: Vec<String> =
            ["prog", "meanvalue", "--x", "100", "--config", dir.to_str().unwrap()].iter().map(|s| s.to_string()).collect();
        let merged = merged_args(args).unwrap();
        assert!(merged.contains(&"--spec=moebius".to_string()));
        assert!(merged.contains(&"--pmax=5000".to_string()));
        assert!(!merged.iter().any(|a| a == "--x=1e4"));
        std::fs::remove_file(dir).unwrap();
    }

    #[test]
    fn malformed_lines_are_rejected() {
        assert!(parse_config("x 10", "cfg").is_err());
        assert!(parse_config("config=other", "cfg").is_err());
        assert_eq!(parse_config("delta_max = 0.1", "cfg").unwrap()[0].0, "delta-max");
    }
}
