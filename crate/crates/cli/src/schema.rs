//! A small structural validator for the subset of JSON Schema the published
//! output schemas use: `type`, `properties`, `required`, `items`, `enum`,
//! `additionalProperties` and `const`.

use serde_json::Value;

/// Validate `instance` against `schema`, returning the path and reason of
/// the first violation.
pub fn validate(instance: &Value, schema: &Value) -> Result<(), String> {
    check(instance, schema, "$")
}

fn check(instance: &Value, schema: &Value, path: &str) -> Result<(), String> {
    let obj = match schema {
        Value::Bool(true) => return Ok(()),
        Value::Bool(false) => return Err(format!("{path}: schema forbids any value")),
        Value::Object(map) => map,
        _ => return Err(format!("{path}: malformed schema")),
    };

    if let Some(expected) = obj.get("type") {
        let names: Vec<&str> = match expected {
            Value::String(s) => vec![s.as_str()],
            Value::Array(a) => a.iter().filter_map(Value::as_str).collect(),
            _ => return Err(format!("{path}: malformed type keyword")),
        };
        if !names.iter().any(|n| type_matches(instance, n)) {
            return Err(format!(
                "{path}: expected type {names:?}, found {}",
                type_name(instance)
            ));
        }
    }

    if let Some(allowed) = obj.get("enum").and_then(Value::as_array) {
        if !allowed.contains(instance) {
            return Err(format!("{path}: value not in enum"));
        }
    }
    if let Some(expected) = obj.get("const") {
        if instance != expected {
            return Err(format!("{path}: value differs from const {expected}"));
        }
    }

    if let Value::Object(fields) = instance {
        if let Some(required) = obj.get("required").and_then(Value::as_array) {
            for name in required.iter().filter_map(Value::as_str) {
                if !fields.contains_key(name) {
                    return Err(format!("{path}: missing required property '{name}'"));
                }
            }
        }
        let props = obj.get("properties").and_then(Value::as_object);
        for (name, value) in fields {
            let sub_path = format!("{path}.{name}");
            if let Some(sub) = props.and_then(|p| p.get(name)) {
                check(value, sub, &sub_path)?;
            } else if let Some(additional) = obj.get("additionalProperties") {
                match additional {
                    Value::Bool(false) => {
                        return Err(format!("{path}: unexpected property '{name}'"));
                    }
                    Value::Bool(true) => {}
                    schema => check(value, schema, &sub_path)?,
                }
            }
        }
    }

    if let (Value::Array(items), Some(item_schema)) = (instance, obj.get("items")) {
        for (idx, item) in items.iter().enumerate() {
            check(item, item_schema, &format!("{path}[{idx}]"))?;
        }
    }

    Ok(())
}

fn type_matches(value: &Value, name: &str) -> bool {
    match name {
        "object" => value.is_object(),
        "array" => value.is_array(),
        "string" => value.is_string(),
        "number" => value.is_number(),
        "integer" => value.as_i64().is_some() || value.as_u64().is_some(),
        "boolean" => value.is_boolean(),
        "null" => value.is_null(),
        _ => false,
    }
}

fn type_name(value: &Value) -> &'static str {
    match value {
        Value::Null => "null",
        Value::Bool(_) => "boolean",
        Value::Number(_) => "number",
        Value::String(_) => "string",
        Value::Array(_) => "array",
        Value::Object(_) => "object",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn accepts_and_rejects() {
        let schema = json!({
            "type": "object",
            "required": ["a"],
            "properties": {
                "a": {"type": "number"},
                "b": {"type": ["string", "null"]},
                "c": {"type": "array", "items": {"type": "integer"}}
            },
            "additionalProperties": false
        });
        assert!(validate(&json!({"a": 1.5, "b": null, "c": [1, 2]}), &schema).is_ok());
        assert!(validate(&json!({"b": "x"}), &schema).is_err());
        assert!(validate(&json!({"a": "not a number"}), &schema).is_err());
        assert!(validate(&json!({"a": 1, "z": 0}), &schema).is_err());
        assert!(validate(&json!({"a": 1, "c": [1.5]}), &schema).is_err());
    }

    #[test]
    fn map_of_numbers() {
        let schema = json!({
            "type": "object",
            "additionalProperties": {"type": "number"}
        });
        assert!(validate(&json!({"mf": 0.2, "cs": 0.3}), &schema).is_ok());
        assert!(validate(&json!({"mf": "high"}), &schema).is_err());
    }
}
