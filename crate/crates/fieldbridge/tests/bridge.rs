mod common;

use common::{serial, session};
use fieldbridge::{GuestErrorKind, ScriptSource, Session};
use fieldbridge_core::FieldBuffer;
use proptest::prelude::*;

const DOUBLE_VALUE: &str = "def double_value(number):\n    return 2.0*number\n";

#[test]
fn lifecycle_uniqueness_and_reopen() {
    let _g = serial();
    let s = Session::open().unwrap();
    assert!(s.user_names().unwrap().is_empty());
    let again = Session::open().unwrap_err();
    assert_eq!(again.kind, GuestErrorKind::RuntimeError);
    s.set_scalar("leftover", 1.0).unwrap();
    s.close().unwrap();
    let err = s.set_scalar("x", 1.0).unwrap_err();
    assert_eq!(err.kind, GuestErrorKind::RuntimeError);
    assert!(s.close().is_err());

    let s2 = Session::open().unwrap();
    assert!(
        s2.user_names().unwrap().is_empty(),
        "fresh scope after reopen"
    );
    s2.set_scalar("x", 3.0).unwrap();
    assert_eq!(s2.get_scalar("x").unwrap(), 3.0);
    fieldbridge::close_session(&s2).unwrap();
    assert!(fieldbridge::close_session(&s2).is_err());
}

#[test]
fn dropping_a_session_frees_the_slot() {
    let _g = serial();
    {
        let _s = Session::open().unwrap();
    }
    let s = Session::open().unwrap();
    s.close().unwrap();
}

#[test]
fn double_value_walkthrough() {
    let (_g, s) = session();
    s.load_script(&ScriptSource::from(DOUBLE_VALUE)).unwrap();
    assert!(s.contains("double_value").unwrap());
    let a = 2.0;
    s.set_scalar("x", a).unwrap();
    assert_eq!(s.get_scalar("x").unwrap(), 2.0);
    s.exec_statement("y = double_value(x)").unwrap();
    let b = s.get_scalar("y").unwrap();
    assert_eq!((a, b), (2.0, 4.0));
    assert_eq!(s.user_names().unwrap(), ["double_value", "x", "y"]);
}

#[test]
fn scalar_errors() {
    let (_g, s) = session();
    s.set_scalar("t", 0.0).unwrap();
    assert_eq!(s.get_scalar("t").unwrap(), 0.0);
    assert_eq!(
        s.get_scalar("nonexistent").unwrap_err().kind,
        GuestErrorKind::NameMissing
    );
    s.exec_statement("y = 'text'").unwrap();
    assert_eq!(
        s.get_scalar("y").unwrap_err().kind,
        GuestErrorKind::TypeMismatch
    );
    assert_eq!(
        s.set_scalar("not valid", 1.0).unwrap_err().kind,
        GuestErrorKind::RuntimeError
    );
}

#[test]
fn script_loading_errors() {
    let (_g, s) = session();
    let missing = ScriptSource::Path("/definitely/not/here.py".into());
    assert_eq!(
        s.load_script(&missing).unwrap_err().kind,
        GuestErrorKind::ScriptNotFound
    );
    let err = s.load_script(&ScriptSource::from("def f(:")).unwrap_err();
    assert_eq!(err.kind, GuestErrorKind::SyntaxError);
    assert!(!err.message.is_empty());
    assert!(err.message.contains("SyntaxError"), "{}", err.message);
}

#[test]
fn script_from_file_and_cumulative_scope() {
    let (_g, s) = session();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("lib.py");
    std::fs::write(&path, DOUBLE_VALUE).unwrap();
    s.load_script(&ScriptSource::Path(path)).unwrap();
    s.load_script(&"def triple(v):\n    return 3.0*v\n".into())
        .unwrap();
    s.exec_statement("z = triple(double_value(1.5))").unwrap();
    assert_eq!(s.get_scalar("z").unwrap(), 9.0);
}

#[test]
fn guest_exceptions_become_errors() {
    let (_g, s) = session();
    let err = s.exec_statement("z = 1/0").unwrap_err();
    assert_eq!(err.kind, GuestErrorKind::RuntimeError);
    assert!(err.message.contains("division"), "{}", err.message);
    assert!(err.message.contains("Traceback"), "{}", err.message);
    let before = s.user_names().unwrap();
    s.exec_statement("pass").unwrap();
    assert_eq!(s.user_names().unwrap(), before);
    let err = s.exec_statement("raise ValueError('boom')").unwrap_err();
    assert!(err.message.contains("boom"));
    // the session survives guest failures
    s.set_scalar("ok", 1.0).unwrap();
}

#[test]
fn whole_field_copy_paths() {
    let (_g, s) = session();
    let x = FieldBuffer::scalar(vec![10.0, 20.0, 30.0]);
    s.put_field_copy("x", &x).unwrap();
    s.exec_statement("ok = float(x.ndim == 1 and x.shape[0] == 3 and x.sum() == 60.0)")
        .unwrap();
    assert_eq!(s.get_scalar("ok").unwrap(), 1.0);

    let empty = FieldBuffer::zeros(0, 6).unwrap();
    s.put_field_copy("e", &empty).unwrap();
    s.exec_statement("eshape = e.shape").unwrap();
    s.exec_statement("ok = float(eshape == (0, 6))").unwrap();
    assert_eq!(s.get_scalar("ok").unwrap(), 1.0);
    assert_eq!(s.get_field_copy("e", (0, 6)).unwrap(), empty);

    s.exec_statement("result = _fb_np.array([1., 2., 3.])")
        .unwrap();
    let r = s.get_field_copy("result", (3, 1)).unwrap();
    assert_eq!(r.as_slice(), &[1.0, 2.0, 3.0]);
    assert_eq!(
        s.get_field_copy("result", (4, 1)).unwrap_err().kind,
        GuestErrorKind::ShapeMismatch
    );
    assert_eq!(
        s.get_field_copy("nothing", (1, 1)).unwrap_err().kind,
        GuestErrorKind::NameMissing
    );

    // guest mutation after the copy does not reach the host
    s.exec_statement("result[0] = 99.0").unwrap();
    assert_eq!(r.as_slice()[0], 1.0);

    // integer arrays and lists are converted
    s.exec_statement("ints = [[1, 2, 3]]").unwrap();
    assert_eq!(
        s.get_field_copy("ints", (1, 3)).unwrap().as_slice(),
        &[1.0, 2.0, 3.0]
    );
    s.exec_statement("word = 'abc'").unwrap();
    assert_eq!(
        s.get_field_copy("word", (1, 1)).unwrap_err().kind,
        GuestErrorKind::TypeMismatch
    );

    // strided guest arrays are gathered in row-major order
    s.exec_statement("tr = _fb_np.arange(6.0).reshape(3, 2).T")
        .unwrap();
    assert_eq!(
        s.get_field_copy("tr", (2, 3)).unwrap().as_slice(),
        &[0.0, 2.0, 4.0, 1.0, 3.0, 5.0]
    );
}

#[test]
fn element_paths_match_whole_field() {
    let (_g, s) = session();
    let p = FieldBuffer::scalar(vec![1.0, -2.5, 4.0, 8.25]);
    s.load_script(&"def work(v):\n    return v * v + 1.0\n".into())
        .unwrap();

    let mut per_cell = Vec::new();
    for cell in 0..p.n_elements() {
        s.put_element("p", &p, cell).unwrap();
        s.exec_statement("result = work(p)").unwrap();
        per_cell.push(s.get_element("result", 1).unwrap()[0]);
    }
    s.put_field_copy("p", &p).unwrap();
    s.exec_statement("result = work(p)").unwrap();
    let whole = s.get_field_copy("result", (4, 1)).unwrap();
    assert_eq!(whole.as_slice(), &per_cell[..]);

    let err = s.put_element("p", &p, 4).unwrap_err();
    assert_eq!(err.kind, GuestErrorKind::ShapeMismatch);

    let v = FieldBuffer::new(6, (0..6).map(f64::from).collect()).unwrap();
    s.put_element("row", &v, 0).unwrap();
    s.exec_statement("ok = float(row.shape == (6,))").unwrap();
    assert_eq!(s.get_scalar("ok").unwrap(), 1.0);
    s.exec_statement("row2 = row.reshape(1, 6) * 2").unwrap();
    assert_eq!(
        s.get_element("row2", 6).unwrap(),
        vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0]
    );
    assert_eq!(
        s.get_element("row2", 3).unwrap_err().kind,
        GuestErrorKind::ShapeMismatch
    );

    let single = FieldBuffer::new(3, vec![1.0, 2.0, 3.0]).unwrap();
    s.put_element("a", &single, 0).unwrap();
    s.put_field_copy("b", &single).unwrap();
    s.exec_statement("same = float((a == b[0]).all())").unwrap();
    assert_eq!(s.get_scalar("same").unwrap(), 1.0);
    let stats = s.stats();
    assert!(stats.element_copies_in >= 6 && stats.field_copies_in >= 2);
}

#[test]
fn by_reference_view_writes_through() {
    let (_g, s) = session();
    let mut strain = FieldBuffer::zeros(5, 6).unwrap();
    let before = s.stats();
    {
        let mut lease = s.publish_field_by_ref("strain", &mut strain).unwrap();
        assert_eq!(lease.address() % 8, 0);
        assert_eq!(lease.shape(), (5, 6));
        assert_eq!(lease.element_width(), 8);
        s.exec_statement("strain[0, 0] = 7.0").unwrap();
        assert_eq!(lease.value(0, 0), Some(7.0));
        s.exec_statement("sh = strain_shape").unwrap();
        assert!(s.contains("strain_address").unwrap());
        assert_eq!(s.active_leases(), 1);
        lease.release().unwrap();
        assert!(!lease.is_active());
        assert_eq!(
            lease.release().unwrap_err().kind,
            GuestErrorKind::RuntimeError
        );
    }
    assert_eq!(strain.get(0, 0), Some(7.0));
    assert_eq!(strain.as_slice().iter().filter(|v| **v != 0.0).count(), 1);
    assert_eq!(
        s.get_field_copy("strain", (5, 6)).unwrap_err().kind,
        GuestErrorKind::NameMissing
    );
    assert!(!s.contains("strain_address").unwrap());
    let after = s.stats();
    assert_eq!(after.bytes_copied, before.bytes_copied);
    assert_eq!(after.leases_published, before.leases_published + 1);
}

#[test]
fn readonly_view_rejects_guest_writes() {
    let (_g, s) = session();
    let field = FieldBuffer::scalar(vec![1.0, 2.0, 3.0]);
    let lease = s.publish_field_by_ref_readonly("t", &field).unwrap();
    s.exec_statement("total = float(t.sum())").unwrap();
    assert_eq!(s.get_scalar("total").unwrap(), 6.0);
    let err = s.exec_statement("t[0] = 5.0").unwrap_err();
    assert!(err.message.contains("read-only"), "{}", err.message);
    drop(lease);
    assert_eq!(field.as_slice(), &[1.0, 2.0, 3.0]);
    assert_eq!(s.active_leases(), 0);
}

#[test]
fn empty_lease_and_close_rules() {
    let (_g, s) = session();
    let mut empty = FieldBuffer::zeros(0, 6).unwrap();
    let mut lease = s.publish_field_by_ref("e", &mut empty).unwrap();
    s.exec_statement(
        "count = 0\nfor row in e:\n    count += 1\nshape_ok = float(e.shape == (0, 6))",
    )
    .unwrap();
    assert_eq!(s.get_scalar("count").unwrap(), 0.0);
    assert_eq!(s.get_scalar("shape_ok").unwrap(), 1.0);
    assert_eq!(s.close().unwrap_err().kind, GuestErrorKind::RuntimeError);
    lease.release().unwrap();
    s.close().unwrap();
}

#[test]
fn session_is_confined_to_its_thread() {
    // `Session` is !Send; the check below documents the intent at runtime
    // through the owner id.
    let (_g, s) = session();
    assert_eq!(s.owner_thread(), std::thread::current().id());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn copy_round_trip_is_bit_exact(
        (c, data) in prop_oneof![Just(1usize), Just(3), Just(6), Just(9)]
            .prop_flat_map(|c| (Just(c), (0usize..40).prop_flat_map(move |n| {
                proptest::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), n * c)
            })))
    ) {
        let (_g, s) = session();
        let f = FieldBuffer::new(c, data).unwrap();
        s.put_field_copy("f", &f).unwrap();
        let back = s.get_field_copy("f", f.shape()).unwrap();
        prop_assert_eq!(
            back.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            f.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
    }

    #[test]
    fn guest_write_touches_exactly_one_host_element(
        n in 1usize..50, i in 0usize..50, j in 0usize..6, value in -1e9..1e9f64
    ) {
        let i = i % n;
        let (_g, s) = session();
        let mut field = FieldBuffer::zeros(n, 6).unwrap();
        {
            let _lease = s.publish_field_by_ref("v", &mut field).unwrap();
            s.set_scalar("value", value).unwrap();
            s.exec_statement(&format!("v[{i}, {j}] = value")).unwrap();
        }
        for (k, x) in field.as_slice().iter().enumerate() {
            let expected = if k == i * 6 + j { value } else { 0.0 };
            prop_assert_eq!(*x, expected);
        }
    }
}
