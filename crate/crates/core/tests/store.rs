mod common;

use std::collections::{BTreeSet, HashMap};

use regrasp::pipeline::precompute;
use regrasp::placement::GripContacts;
use regrasp::store::{Store, StoreError};
use rusqlite::Connection;

use common::{same_bits, small_cube};

fn contact_numbers(c: &GripContacts) -> Vec<f64> {
    [c.p0.coords, c.p1.coords, c.n0, c.n1].iter().flat_map(|v| [v.x, v.y, v.z]).collect()
}

#[test]
fn fresh_store_has_every_table_and_reopens() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.sqlite");
    {
        let s = Store::open(&path).unwrap();
        let counts = s.row_counts().unwrap();
        assert_eq!(counts.len(), 10);
        assert!(counts.iter().all(|c| c.1 == 0));
    }
    let s = Store::open(&path).unwrap();
    assert!(s.audit().unwrap().is_clean());
}

#[test]
fn open_existing_requires_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("missing.sqlite");
    assert!(matches!(Store::open_existing(&path), Err(StoreError::Io(_))));
    assert!(!path.exists());
}

#[test]
fn extra_column_needs_migration() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.sqlite");
    Store::open(&path).unwrap();
    Connection::open(&path)
        .unwrap()
        .execute_batch("ALTER TABLE angle ADD COLUMN note TEXT")
        .unwrap();
    assert!(matches!(Store::open(&path), Err(StoreError::MigrationRequired(_))));
}

#[test]
fn foreign_tables_need_migration() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.sqlite");
    Connection::open(&path).unwrap().execute_batch("CREATE TABLE other (x INTEGER)").unwrap();
    assert!(matches!(Store::open(&path), Err(StoreError::MigrationRequired(_))));
}

#[test]
fn wrong_version_needs_migration() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.sqlite");
    Store::open(&path).unwrap();
    Connection::open(&path).unwrap().execute_batch("PRAGMA user_version = 7").unwrap();
    assert!(matches!(Store::open(&path), Err(StoreError::MigrationRequired(_))));
}

#[test]
fn round_trip_is_bitwise() {
    let ws = small_cube();
    let pre = precompute(&ws).unwrap();
    let mut store = Store::open_in_memory().unwrap();
    let map = store.save_pipeline(&pre.data()).unwrap();
    let obj = store.object_id("cube50").unwrap();
    assert_eq!(obj, map.object);

    let grips = store.free_air_grips(obj).unwrap();
    assert_eq!(grips.len(), pre.plan.grasps.len());
    let by_id: HashMap<i64, _> = grips.iter().map(|g| (g.id, g)).collect();
    for g in &pre.plan.grasps {
        let row = by_id[&map.grasps[&g.id]];
        assert!(same_bits(&row.rotmat.to_array(), &g.hand_pose.to_array()));
        assert_eq!(row.jawwidth.to_bits(), g.jaw_width.to_bits());
        assert!(same_bits(&contact_numbers(&row.contacts), &contact_numbers(&GripContacts::of_grasp(g))));
    }

    let placements: HashMap<i64, _> = store.free_placements(obj).unwrap().into_iter().map(|p| (p.id, p)).collect();
    for p in &pre.placements {
        assert!(same_bits(&placements[&map.placements[&p.id]].rotmat.to_array(), &p.rotmat.to_array()));
    }

    let pgrips: HashMap<i64, _> = store.free_tabletop_grips(obj).unwrap().into_iter().map(|g| (g.id, g)).collect();
    assert_eq!(pgrips.len(), pre.placement_grips.len());
    for g in &pre.placement_grips {
        let row = &pgrips[&map.placement_grips[&g.id]];
        assert_eq!(row.idfreeairgrip, map.grasps[&g.freeairgrip_id]);
        assert_eq!(row.idfreetabletopplacement, map.placements[&g.placement_id]);
        assert!(same_bits(&row.rotmat.to_array(), &g.hand_pose.to_array()));
        assert_eq!(row.jawwidth.to_bits(), g.jaw_width.to_bits());
        assert!(same_bits(&contact_numbers(&row.contacts), &contact_numbers(&g.contacts)));
    }

    let angles: HashMap<i64, f64> = store.angles().unwrap().into_iter().collect();
    for (i, a) in pre.angles.iter().enumerate() {
        assert_eq!(angles[&map.angles[i]].to_bits(), a.to_bits());
    }

    let tps: HashMap<i64, _> = store.tabletop_placements(obj).unwrap().into_iter().map(|t| (t.id, t)).collect();
    for t in &pre.tabletop.placements {
        let row = &tps[&map.tabletop_placements[&t.id]];
        assert!(same_bits(&row.position, &t.position));
        assert!(same_bits(&row.rotmat.to_array(), &t.world_pose.to_array()));
        assert_eq!(row.idangle, map.angles[t.angle_id]);
    }

    let tgs: HashMap<i64, _> = store.tabletop_grips(obj).unwrap().into_iter().map(|g| (g.id, g)).collect();
    assert_eq!(tgs.len(), pre.tabletop.grips.len());
    for g in &pre.tabletop.grips {
        let row = &tgs[&map.tabletop_grips[&g.id]];
        assert!(same_bits(&row.rotmat.to_array(), &g.hand_pose.to_array()));
        assert_eq!(row.jawwidth.to_bits(), g.jaw_width.to_bits());
        assert!(same_bits(&contact_numbers(&row.contacts), &contact_numbers(&g.contacts)));
    }

    let rets = store.ikrets().unwrap();
    assert_eq!(rets.len(), 1);
    assert_eq!(rets[0].1.handx_distance.to_bits(), pre.retraction.handx_distance.to_bits());
    assert_eq!(rets[0].1.worldz_distance.to_bits(), pre.retraction.worldz_distance.to_bits());

    let (name, rows) = &pre.ik[0];
    let robot = store.robot_id(name).unwrap();
    let ik: HashMap<i64, _> = store.ik_rows(obj, robot).unwrap().into_iter().map(|r| (r.idtabletopgrips, r)).collect();
    assert_eq!(ik.len(), rows.len());
    for f in rows {
        let r = ik[&map.tabletop_grips[&f.tabletopgrip_id]];
        assert_eq!(
            (r.feasibility, r.feasibility_handx, r.feasibility_handxworldz),
            (f.feasibility, f.feasibility_handx, f.feasibility_handxworldz)
        );
    }
    assert!(store.audit().unwrap().is_clean());
}

#[test]
fn missing_reference_rolls_back() {
    let ws = small_cube();
    let mut pre = precompute(&ws).unwrap();
    pre.tabletop.grips[0].freeairgrip_id = pre.plan.grasps.len() + 10;
    let mut store = Store::open_in_memory().unwrap();
    assert!(matches!(store.save_pipeline(&pre.data()), Err(StoreError::Integrity(_))));
    assert!(store.row_counts().unwrap().iter().all(|c| c.1 == 0));
}

#[test]
fn resave_replaces_rows_and_keeps_ids() {
    let ws = small_cube();
    let pre = precompute(&ws).unwrap();
    let mut store = Store::open_in_memory().unwrap();
    let a = store.save_pipeline(&pre.data()).unwrap();
    let before = store.row_counts().unwrap();
    let b = store.save_pipeline(&pre.data()).unwrap();
    assert_eq!(a.object, b.object);
    assert_eq!(a.angles, b.angles);
    assert_eq!(a.robots, b.robots);
    assert_eq!(a.ikret, b.ikret);
    assert_eq!(before, store.row_counts().unwrap());
    assert!(store.audit().unwrap().is_clean());
}

#[test]
fn audit_flags_dangling_rows() {
    let ws = small_cube();
    let pre = precompute(&ws).unwrap();
    let mut store = Store::open_in_memory().unwrap();
    store.save_pipeline(&pre.data()).unwrap();
    let c = store.connection();
    c.execute_batch("PRAGMA foreign_keys = OFF; DELETE FROM angle WHERE idangle = (SELECT MIN(idangle) FROM angle); PRAGMA foreign_keys = ON;")
        .unwrap();
    let rep = store.audit().unwrap();
    assert!(!rep.foreign_key_violations.is_empty());
}

#[test]
fn audit_flags_missing_instances() {
    let ws = small_cube();
    let pre = precompute(&ws).unwrap();
    let mut store = Store::open_in_memory().unwrap();
    store.save_pipeline(&pre.data()).unwrap();
    let c = store.connection();
    c.execute_batch(
        "DELETE FROM ik WHERE idtabletopgrips IN (SELECT id FROM tabletopgrips WHERE idtabletopplacements = 1);
         DELETE FROM tabletopgrips WHERE idtabletopplacements = 1;
         DELETE FROM tabletopplacements WHERE id = 1;",
    )
    .unwrap();
    let rep = store.audit().unwrap();
    assert!(rep.foreign_key_violations.is_empty());
    assert!(!rep.cardinality_violations.is_empty());
}

#[test]
fn pair_queries_match_nested_loops() {
    let ws = small_cube();
    let pre = precompute(&ws).unwrap();
    let mut store = Store::open_in_memory().unwrap();
    store.save_pipeline(&pre.data()).unwrap();
    let obj = store.object_id("cube50").unwrap();
    let rows = store.tabletop_grips(obj).unwrap();
    let mut shared = BTreeSet::new();
    let mut coplaced = BTreeSet::new();
    for a in &rows {
        for b in &rows {
            if a.id >= b.id {
                continue;
            }
            if a.idfreeairgrip == b.idfreeairgrip && a.idtabletopplacements != b.idtabletopplacements {
                shared.insert((a.id, b.id));
            }
            if a.idtabletopplacements == b.idtabletopplacements {
                coplaced.insert((a.id, b.id));
            }
        }
    }
    assert!(!shared.is_empty() && !coplaced.is_empty());
    assert_eq!(store.query_shared_grasps(obj).unwrap(), shared.into_iter().collect::<Vec<_>>());
    assert_eq!(store.query_coplaced_grips(obj).unwrap(), coplaced.into_iter().collect::<Vec<_>>());
}

#[test]
fn unknown_names_are_reported() {
    let store = Store::open_in_memory().unwrap();
    assert!(matches!(store.object_id("nope"), Err(StoreError::UnknownObject(_))));
    assert!(matches!(store.robot_id("nope"), Err(StoreError::UnknownRobot(_))));
    assert!(matches!(store.free_air_grips(3), Err(StoreError::UnknownObject(_))));
}

#[test]
fn csv_is_ordered_and_stable() {
    let ws = small_cube();
    let pre = precompute(&ws).unwrap();
    let mut store = Store::open_in_memory().unwrap();
    store.save_pipeline(&pre.data()).unwrap();
    let mut a = Vec::new();
    store.export_csv("tabletopgrips", &mut a).unwrap();
    let mut b = Vec::new();
    store.export_csv("tabletopgrips", &mut b).unwrap();
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    let ids: Vec<i64> = text.lines().skip(1).map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(ids.len(), pre.tabletop.grips.len());
    assert!(ids.windows(2).all(|w| w[0] < w[1]));
    assert!(store.export_csv("nosuchtable", &mut Vec::new()).is_err());
}
