#![no_main]

use libfuzzer_sys::fuzz_target;
use npoint_core::model::parse_label_list;
use npoint_core::{LabelRegistry, Parity};

fuzz_target!(|data: &[u8]| {
    let reg = LabelRegistry::from_labels([
        ("x".to_string(), Parity::Even),
        ("y".to_string(), Parity::Even),
        ("f".to_string(), Parity::Odd),
    ])
    .unwrap();
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(ids) = parse_label_list(&reg, s) {
            let names: Vec<&str> = ids.iter().map(|&id| reg.name(id)).collect();
            assert_eq!(parse_label_list(&reg, &names.join(",")).unwrap(), ids);
        }
    }
});
