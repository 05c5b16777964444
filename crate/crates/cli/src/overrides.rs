use serde_json::{Map, Value};

/// Parses `dotted.key=value`; the value is read as JSON when it parses,
/// otherwise as a plain string.
pub fn parse_override(raw: &str) -> Result<(Vec<String>, Value), String> {
    let (key, value) = raw
        .split_once('=')
        .ok_or_else(|| format!("override {raw:?} is not of the form key=value"))?;
    let path: Vec<String> = key.split('.').map(str::to_string).collect();
    if path.iter().any(String::is_empty) {
        return Err(format!("override key {key:?} has an empty segment"));
    }
    let value = serde_json::from_str(value).unwrap_or_else(|_| Value::String(value.to_string()));
    Ok((path, value))
}

/// Sets `path` inside `root`, creating intermediate objects. Unknown keys
/// are caught when the result is deserialised against the schema.
pub fn apply_override(root: &mut Value, path: &[String], value: Value) -> Result<(), String> {
    let mut node = root;
    for (i, seg) in path.iter().enumerate() {
        let obj = match node {
            Value::Object(map) => map,
            Value::Null => {
                *node = Value::Object(Map::new());
                node.as_object_mut().expect("just created")
            }
            _ => {
                return Err(format!(
                    "cannot set {:?}: {:?} is not an object",
                    path.join("."),
                    path[..i].join(".")
                ))
            }
        };
        if i + 1 == path.len() {
            obj.insert(seg.clone(), value);
            return Ok(());
        }
        node = obj.entry(seg.clone()).or_insert(Value::Null);
    }
    Ok(())
}
