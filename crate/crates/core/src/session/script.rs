//! Session script format: one JSON object per line, each holding exactly one
//! event key:
//!
//! ```text
//! {"voice": "select"}
//! {"hand": [0.1, 0.2, 0.3]}
//! {"grab_start": {"pos": [1, 0, 0], "orient": [1, 0, 0, 0]}}
//! {"grab_move": {"pos": [1.5, 0, 0], "orient": [1, 0, 0, 0]}}
//! {"grab_end": true}
//! {"palm_up": true}
//! {"grab_tree": "node-id"}
//! {"release_tree": true}
//! ```
//!
//! `orient` is an optional `[w, x, y, z]` quaternion defaulting to identity.
//! Blank lines are skipped.

use serde_json::{json, Map, Value};

use crate::error::ScriptError;
use crate::geom::{round_sig9, Rotation, Vec3};

use super::InputEvent;

fn vec_from(v: &Value) -> Result<Vec3, String> {
    let arr = v
        .as_array()
        .filter(|a| a.len() == 3)
        .ok_or("expected an array of 3 numbers")?;
    let mut out = Vec3::zeros();
    for (i, x) in arr.iter().enumerate() {
        out[i] = x
            .as_f64()
            .filter(|x| x.is_finite())
            .ok_or("expected finite numbers")?;
    }
    Ok(out)
}

fn grab_from(v: &Value) -> Result<(Vec3, Rotation), String> {
    let obj = v.as_object().ok_or("grab payload must be an object")?;
    if let Some(k) = obj.keys().find(|k| *k != "pos" && *k != "orient") {
        return Err(format!("unknown key '{k}' in grab payload"));
    }
    let pos = vec_from(obj.get("pos").ok_or("grab payload needs 'pos'")?)?;
    let orientation = match obj.get("orient") {
        None => Rotation::identity(),
        Some(q) => {
            let arr = q
                .as_array()
                .filter(|a| a.len() == 4)
                .ok_or("'orient' must be [w, x, y, z]")?;
            let c: Vec<f64> = arr.iter().filter_map(Value::as_f64).collect();
            if c.len() != 4 {
                return Err("'orient' must hold numbers".into());
            }
            Rotation::from_wxyz(c[0], c[1], c[2], c[3]).ok_or("'orient' is not a valid rotation")?
        }
    };
    Ok((pos, orientation))
}

fn require_true(v: &Value, key: &str) -> Result<(), String> {
    match v {
        Value::Bool(true) => Ok(()),
        _ => Err(format!("'{key}' must be true")),
    }
}

/// Decodes one event object.
pub fn event_from_json(v: &Value) -> Result<InputEvent, String> {
    let obj: &Map<String, Value> = v.as_object().ok_or("event must be a JSON object")?;
    if obj.len() != 1 {
        return Err("event must have exactly one key".into());
    }
    let (key, payload) = obj.iter().next().expect("one key");
    match key.as_str() {
        "voice" => Ok(InputEvent::Voice(
            payload
                .as_str()
                .ok_or("'voice' must be a string")?
                .to_string(),
        )),
        "hand" => Ok(InputEvent::HandMove(vec_from(payload)?)),
        "grab_start" => {
            let (pos, orientation) = grab_from(payload)?;
            Ok(InputEvent::GrabStart { pos, orientation })
        }
        "grab_move" => {
            let (pos, orientation) = grab_from(payload)?;
            Ok(InputEvent::GrabMove { pos, orientation })
        }
        "grab_end" => require_true(payload, key).map(|_| InputEvent::GrabEnd),
        "palm_up" => Ok(InputEvent::PalmUp(
            payload.as_bool().ok_or("'palm_up' must be a boolean")?,
        )),
        "grab_tree" => Ok(InputEvent::GrabTreeNode(
            payload
                .as_str()
                .ok_or("'grab_tree' must be a string")?
                .to_string(),
        )),
        "release_tree" => require_true(payload, key).map(|_| InputEvent::ReleaseTreeNode),
        other => Err(format!("unknown event '{other}'")),
    }
}

fn vec_json(v: &Vec3) -> Value {
    json!([round_sig9(v.x), round_sig9(v.y), round_sig9(v.z)])
}

pub fn event_to_json(event: &InputEvent) -> Value {
    let grab = |pos: &Vec3, q: &Rotation| json!({"pos": vec_json(pos), "orient": q.wxyz().map(round_sig9)});
    match event {
        InputEvent::Voice(u) => json!({ "voice": u }),
        InputEvent::HandMove(p) => json!({ "hand": vec_json(p) }),
        InputEvent::GrabStart { pos, orientation } => {
            json!({ "grab_start": grab(pos, orientation) })
        }
        InputEvent::GrabMove { pos, orientation } => json!({ "grab_move": grab(pos, orientation) }),
        InputEvent::GrabEnd => json!({ "grab_end": true }),
        InputEvent::PalmUp(b) => json!({ "palm_up": b }),
        InputEvent::GrabTreeNode(id) => json!({ "grab_tree": id }),
        InputEvent::ReleaseTreeNode => json!({ "release_tree": true }),
    }
}

/// One script line for `event`, without the trailing newline.
pub fn script_line(event: &InputEvent) -> String {
    event_to_json(event).to_string()
}

pub fn parse_script(text: &str) -> Result<Vec<InputEvent>, ScriptError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, line)| {
            let err = |message: String| ScriptError {
                line: n + 1,
                message,
            };
            let value: Value =
                serde_json::from_str(line).map_err(|e| err(format!("invalid JSON: {e}")))?;
            event_from_json(&value).map_err(err)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_event_kind() {
        let text = r#"{"voice": "select"}
{"hand": [0.1, 0.2, 0.3]}

{"grab_start": {"pos": [1, 0, 0], "orient": [1, 0, 0, 0]}}
{"grab_move": {"pos": [1.5, 0, 0]}}
{"grab_end": true}
{"palm_up": false}
{"grab_tree": "n1"}
{"release_tree": true}
"#;
        let events = parse_script(text).unwrap();
        assert_eq!(events.len(), 8);
        assert_eq!(events[0], InputEvent::Voice("select".into()));
        assert_eq!(events[5], InputEvent::PalmUp(false));
        for e in &events {
            let back = event_from_json(&event_to_json(e)).unwrap();
            assert_eq!(&back, e);
        }
    }

    #[test]
    fn bad_line_is_numbered() {
        let text =
            "{\"voice\": \"select\"}\n{\"palm_up\": true}\n{\"hand\": [0,0,0]}\n{\"voice\": \n";
        let err = parse_script(text).unwrap_err();
        assert_eq!(err.line, 4);
        assert_eq!(parse_script("{\"grab_end\": false}").unwrap_err().line, 1);
        assert!(parse_script("{\"voice\": \"a\", \"hand\": [0,0,0]}").is_err());
        assert!(parse_script("{\"hand\": [0,0]}").is_err());
        assert!(parse_script("{\"jump\": true}").is_err());
    }
}
