use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::mpsc;
use std::thread;
use std::time::Duration;

use drawscaffold_core::geometry::BoundingBox;
use drawscaffold_core::imagecore::{ImageBuffer, Mask};
use drawscaffold_core::segmentation::wire::{SidecarRequest, SidecarResponse};
use drawscaffold_core::segmentation::{
    box_mask, segment, FileProvider, MaskSource, SegmentationRequest, SidecarProvider,
};
use drawscaffold_core::Error;
use proptest::prelude::*;

const FIXTURE: &str = include_str!("fixtures/sidecar_person_laptop.json");

/// Serves exactly one HTTP request with a canned response, handing the
/// request body back over a channel.
fn one_shot_server(status: &'static str, body: String) -> (String, mpsc::Receiver<String>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        let (stream, _) = listener.accept().unwrap();
        let mut reader = BufReader::new(stream.try_clone().unwrap());
        let mut length = 0usize;
        loop {
            let mut line = String::new();
            reader.read_line(&mut line).unwrap();
            if line == "\r\n" || line.is_empty() {
                break;
            }
            if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                length = v.trim().parse().unwrap();
            }
        }
        let mut payload = vec![0; length];
        reader.read_exact(&mut payload).unwrap();
        tx.send(String::from_utf8(payload).unwrap()).unwrap();
        let mut stream = stream;
        write!(
            stream,
            "HTTP/1.1 {status}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
            body.len()
        )
        .unwrap();
    });
    (format!("http://{addr}"), rx)
}

fn image() -> ImageBuffer {
    ImageBuffer::from_fn(64, 48, |x, y| [(x * 4) as u8, (y * 5) as u8, 128]).unwrap()
}

#[test]
fn sidecar_fixture_is_returned_unchanged() {
    let (url, requests) = one_shot_server("200 OK", FIXTURE.to_string());
    let provider = SidecarProvider::new(&url, Duration::from_secs(30));
    let req = SegmentationRequest {
        image: image(),
        text_prompt: Some("person, laptop".into()),
        boxes: vec![],
    };
    let result = segment(&req, &provider).unwrap();

    let sent: SidecarRequest = serde_json::from_str(&requests.recv().unwrap()).unwrap();
    assert_eq!(sent.text_prompt.as_deref(), Some("person, laptop"));
    assert!(sent.boxes.is_empty());
    assert_eq!(sent, SidecarRequest::from_request(&req));

    let fixture: SidecarResponse = serde_json::from_str(FIXTURE).unwrap();
    assert_eq!(result.masks.len(), 2);
    assert_eq!(result.provider, "sidecar");
    for (got, want) in result.masks.iter().zip(&fixture.masks) {
        assert_eq!(got, &want.decode().unwrap());
        assert_eq!(got.mask.dimensions(), (64, 48));
    }
    assert_eq!(result.masks[0].label, "person");
    assert_eq!(result.masks[1].label, "laptop");
    assert_eq!(result.masks[0].mask.count(), 16 * 38);
}

#[test]
fn sidecar_sends_user_boxes() {
    let (url, requests) = one_shot_server("200 OK", FIXTURE.to_string());
    let provider = SidecarProvider::new(&url, Duration::from_secs(30));
    let req = SegmentationRequest {
        image: image(),
        text_prompt: None,
        boxes: vec![BoundingBox::new(0.1, 0.2, 0.3, 0.4).unwrap()],
    };
    segment(&req, &provider).unwrap();
    let raw: serde_json::Value = serde_json::from_str(&requests.recv().unwrap()).unwrap();
    assert_eq!(raw["boxes"], serde_json::json!([[0.1, 0.2, 0.3, 0.4]]));
    assert!(raw.get("text_prompt").is_none());
    assert!(raw["image_png_b64"].as_str().unwrap().len() > 10);
}

#[test]
fn sidecar_error_statuses() {
    let req = SegmentationRequest {
        image: image(),
        text_prompt: Some("cat".into()),
        boxes: vec![],
    };
    let (url, _rx) = one_shot_server("503 Service Unavailable", "{\"error\":\"model not loaded\"}".into());
    let r = segment(&req, &SidecarProvider::new(&url, Duration::from_secs(5)));
    assert!(matches!(r, Err(Error::ProviderUnavailable(_))), "{r:?}");

    let (url, _rx) = one_shot_server("400 Bad Request", "{\"error\":\"bad\"}".into());
    let r = segment(&req, &SidecarProvider::new(&url, Duration::from_secs(5)));
    assert!(matches!(r, Err(Error::InvalidRequest(_))), "{r:?}");

    let (url, _rx) = one_shot_server("200 OK", "{\"masks\": []}".into());
    let r = segment(&req, &SidecarProvider::new(&url, Duration::from_secs(5)));
    assert!(matches!(r, Err(Error::NoDetections)), "{r:?}");

    let (url, _rx) = one_shot_server("200 OK", "not json".into());
    let r = segment(&req, &SidecarProvider::new(&url, Duration::from_secs(5)));
    assert!(matches!(r, Err(Error::ProviderUnavailable(_))), "{r:?}");
}

#[test]
fn file_provider_reads_sorted_masks() {
    let dir = tempfile::tempdir().unwrap();
    for (name, x0) in [("vase", 0u32), ("apple", 10), ("table", 20)] {
        let m = Mask::from_fn(30, 20, |x, _| x >= x0 && x < x0 + 10);
        std::fs::write(dir.path().join(format!("{name}.png")), m.to_png_bytes()).unwrap();
    }
    std::fs::write(dir.path().join("notes.txt"), "ignored").unwrap();
    let provider = FileProvider::new(dir.path());
    let req = SegmentationRequest {
        image: ImageBuffer::filled(30, 20, [1, 2, 3]).unwrap(),
        text_prompt: Some("anything".into()),
        boxes: vec![],
    };
    let a = segment(&req, &provider).unwrap();
    let labels: Vec<&str> = a.masks.iter().map(|m| m.label.as_str()).collect();
    assert_eq!(labels, ["apple", "table", "vase"]);
    assert!(a.masks[0].mask.get(10, 0) && !a.masks[0].mask.get(9, 0));
    assert_eq!(a, segment(&req, &provider).unwrap());

    // user boxes follow the stored masks; a smaller image forces resizing
    let req = SegmentationRequest {
        image: ImageBuffer::filled(15, 10, [1, 2, 3]).unwrap(),
        text_prompt: None,
        boxes: vec![BoundingBox::new(0.0, 0.0, 1.0, 1.0).unwrap()],
    };
    let b = segment(&req, &provider).unwrap();
    assert_eq!(b.masks.len(), 4);
    assert_eq!(b.masks[3].source, MaskSource::Box);
    assert!(b.masks.iter().all(|m| m.mask.dimensions() == (15, 10)));
}

proptest! {
    #[test]
    fn box_masks_are_pixel_exact(
        w in 1u32..40, h in 1u32..40,
        a in 0.0f64..1.0, b in 0.0f64..1.0, c in 0.0f64..1.0, d in 0.0f64..1.0,
    ) {
        let bbox = BoundingBox::new(a.min(c), b.min(d), a.max(c), b.max(d)).unwrap();
        let m = box_mask(w, h, &bbox);
        for y in 0..h {
            for x in 0..w {
                let cx = (2 * x + 1) as f64 / (2 * w) as f64;
                let cy = (2 * y + 1) as f64 / (2 * h) as f64;
                let inside = bbox.x_min <= cx && cx <= bbox.x_max && bbox.y_min <= cy && cy <= bbox.y_max;
                prop_assert_eq!(m.get(x, y), inside);
            }
        }
    }
}
