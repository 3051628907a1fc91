//! The append-only order store: full-fidelity round trips, corruption
//! detection with exact line numbers, and phone lookup.

use drac_cli::store::{RecordingStore, StoreError};
use drac_core::domain::{Controls, CustomerInfo, EighthInches, ProductType};
use drac_core::engine::order::{
    execute_transition, LifecycleEvent, OrderLine, OrderRecord,
};
use drac_core::pricing::Money;

fn advance(mut record: OrderRecord, events: &[LifecycleEvent], base: u64) -> OrderRecord {
    for (i, &e) in events.iter().enumerate() {
        record = execute_transition(&record, e, base + (i as u64 + 1) * 10)
            .unwrap()
            .record;
    }
    record
}

/// A varied population: different kinds, depths into the lifecycle, line
/// counts and flag combinations.
fn synth_orders(n: u64) -> Vec<OrderRecord> {
    use LifecycleEvent as E;
    let paths: [&[E]; 5] = [
        &[],
        &[E::Quote],
        &[E::Quote, E::Invoice, E::Pay],
        &[E::Quote, E::Invoice, E::Pay, E::FaxSent, E::DeliverInstaller],
        &[E::Quote, E::Invoice, E::Pay, E::Close],
    ];
    (0..n)
        .map(|i| {
            let special = i % 3 == 0;
            let customer = CustomerInfo::new(
                format!("Customer {i}"),
                format!("512555{:04}", i % 100),
            );
            let mut record = OrderRecord::new(i + 1, customer, special, i);
            record.install_requested = i % 5 == 0;
            record.measured_by_hd = i % 2 == 0;
            for k in 0..(i % 3) {
                record.lines.push(OrderLine {
                    sku: format!("SKU-{k}"),
                    product: ProductType::Cellular,
                    dims: Some((EighthInches(240 + k as u32), EighthInches(480))),
                    controls: Controls::standard_for(ProductType::Cellular),
                    unit_price: Money(4900 + k as i64),
                });
            }
            let mut path = paths[(i % 5) as usize];
            // the fax and close edges are exclusive to one order kind each
            if special && path.last() == Some(&E::Close) {
                path = &path[..path.len() - 1];
            } else if !special && path.contains(&E::FaxSent) {
                path = &path[..3];
            }
            advance(record, path, i)
        })
        .collect()
}

#[test]
fn thousand_orders_survive_a_restart_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("orders.log");
    let orders = synth_orders(1000);

    let store = RecordingStore::new(&path);
    store.save_all(&orders).unwrap();
    let first_bytes = std::fs::read(&path).unwrap();

    // a later session opens the same file fresh
    drop(store);
    let reopened = RecordingStore::new(&path);
    let loaded = reopened.load().unwrap();
    assert_eq!(loaded.len(), 1000);
    assert_eq!(loaded, orders);

    // rewriting what was read is byte-stable
    reopened.save_all(&loaded).unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), first_bytes);
}

#[test]
fn append_extends_without_rewriting() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("orders.log");
    let store = RecordingStore::new(&path);
    let orders = synth_orders(10);
    for o in &orders {
        store.append(o).unwrap();
    }
    assert_eq!(store.load().unwrap(), orders);
    let extra = synth_orders(12).pop().unwrap();
    store.append(&extra).unwrap();
    let all = store.load().unwrap();
    assert_eq!(all.len(), 11);
    assert_eq!(all.last().unwrap(), &extra);
}

#[test]
fn a_flipped_byte_is_reported_at_its_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("orders.log");
    let store = RecordingStore::new(&path);
    store.save_all(&synth_orders(10)).unwrap();

    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    // damage the json payload of line 7 without touching its checksum
    lines[6] = lines[6].replacen("\"id\":7", "\"id\":8", 1);
    assert_ne!(lines[6], text.lines().nth(6).unwrap(), "damage must apply");
    std::fs::write(&path, lines.join("\n") + "\n").unwrap();

    match store.load() {
        Err(StoreError::Corrupt { line_number, reason }) => {
            assert_eq!(line_number, 7);
            assert!(reason.contains("checksum mismatch"), "{reason}");
        }
        other => panic!("expected corruption at line 7, got {other:?}"),
    }
}

#[test]
fn a_truncated_line_is_reported_at_its_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("orders.log");
    let store = RecordingStore::new(&path);
    store.save_all(&synth_orders(5)).unwrap();

    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let cut = lines[2].len() - 10;
    lines[2].truncate(cut);
    std::fs::write(&path, lines.join("\n") + "\n").unwrap();

    match store.load() {
        Err(StoreError::Corrupt { line_number, .. }) => assert_eq!(line_number, 3),
        other => panic!("expected corruption at line 3, got {other:?}"),
    }
}

#[test]
fn missing_file_is_an_empty_store() {
    let dir = tempfile::tempdir().unwrap();
    let store = RecordingStore::new(dir.path().join("never_written.log"));
    assert_eq!(store.load().unwrap(), vec![]);
}

#[test]
fn phone_lookup_returns_newest_first() {
    let dir = tempfile::tempdir().unwrap();
    let store = RecordingStore::new(dir.path().join("orders.log"));
    let mut orders = synth_orders(6);
    for o in &mut orders {
        o.customer.phone = String::from("5125550100");
    }
    orders[3].customer.phone = String::from("5125550199");
    store.save_all(&orders).unwrap();

    let hits = store.find_by_phone("5125550100").unwrap();
    assert_eq!(hits.len(), 5);
    let ids: Vec<u64> = hits.iter().map(|r| r.id).collect();
    assert_eq!(ids, [6, 5, 3, 2, 1]);
    assert_eq!(store.find_by_phone("5125550199").unwrap().len(), 1);
    assert!(store.find_by_phone("0000000000").unwrap().is_empty());
}
