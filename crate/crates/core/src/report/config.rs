use std::collections::BTreeMap;

/// Keys normalized to kebab case, values trimmed.
pub type ConfigMap = BTreeMap<String, String>;

/// Parses `key = value` lines. `#` starts a comment; blank lines are skipped.
/// Keys may use `_` or `-`.
pub fn parse_config(text: &str) -> Result<ConfigMap, String> {
    let mut map = ConfigMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| format!("line {}: expected 'key = value'", n + 1))?;
        let key = k.trim().replace('_', "-");
        if key.is_empty() {
            return Err(format!("line {}: empty key", n + 1));
        }
        map.insert(key, v.trim().to_string());
    }
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_keys_and_comments() {
        let m = parse_config("# sweep\npreset = critical\na_min=0.1 # lower end\n\nmeasures = entropy,rf\n").unwrap();
        assert_eq!(m["preset"], "critical");
        assert_eq!(m["a-min"], "0.1");
        assert_eq!(m["measures"], "entropy,rf");
        assert_eq!(m.len(), 3);
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(parse_config("preset critical").is_err());
        assert!(parse_config(" = 3").is_err());
    }
}
