//! Built-in example configs, embedded at compile time.

pub const DEMO_NAMES: [&str; 3] = ["classical-2x2", "lueders-qubit", "consecutive"];

/// Returns the JSON text of a built-in demo config.
pub fn demo_config(name: &str) -> Option<&'static str> {
    match name {
        "classical-2x2" => Some(include_str!("../../demos/classical-2x2.json")),
        "lueders-qubit" => Some(include_str!("../../demos/lueders-qubit.json")),
        "consecutive" => Some(include_str!("../../demos/consecutive.json")),
        _ => None,
    }
}
