import base64

import numpy as np
import pytest
from fastapi.testclient import TestClient

from conftest import blob_dataset, small_config
from polypix import checkpoint as ck
from polypix.generator import count_params, init_generator, sample
from polypix.image import decode_png, encode_png, quantize
from polypix.service.app import create_app


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


def b64(data: bytes) -> str:
    return base64.b64encode(data).decode()


def unb64(payload: str) -> bytes:
    return base64.b64decode(payload)


CFG = {"z_dim": 8, "w_dim": 16, "levels": 4, "feature_dim": 12}


def source_from_config(init_seed=0):
    return {"config": CFG, "init_seed": init_seed}


def test_healthz(client):
    resp = client.get("/healthz")
    assert resp.status_code == 200
    assert resp.json() == {"status": "ok"}


def test_params_matches_library(client):
    resp = client.post("/params", json={"config": CFG})
    assert resp.status_code == 200
    body = resp.json()
    assert body["total"] == count_params(small_config())
    names = [r["name"] for r in body["records"]]
    assert names[0] == "mapping.0.weight" and names[-1] == "rgb_head.bias"


def test_sample_matches_library_bitwise(client):
    resp = client.post("/sample", json={
        "source": source_from_config(3), "seed": 7, "height": 9, "width": 9,
    })
    assert resp.status_code == 200
    served = decode_png(unb64(resp.json()["png_b64"]))
    gen = init_generator(small_config(), seed=3)
    z = np.random.default_rng(7).standard_normal(8)
    local = sample(gen, z, None, 9, 9)
    assert np.array_equal(quantize(served.values), quantize(local.values))


def test_sample_from_uploaded_checkpoint(client):
    gen = init_generator(small_config(), seed=5)
    resp = client.post("/sample", json={
        "source": {"checkpoint_b64": b64(ck.generator_bytes(gen))},
        "seed": 1, "height": 6, "width": 6,
    })
    assert resp.status_code == 200
    assert resp.json()["height"] == 6


def test_source_validation(client):
    resp = client.post("/sample", json={"source": {}, "seed": 0})
    assert resp.status_code == 422
    assert resp.json()["detail"]["kind"] == "argument"
    both = {"checkpoint_b64": "AAAA", "config": CFG}
    resp = client.post("/sample", json={"source": both, "seed": 0})
    assert resp.status_code == 422


def test_bad_checkpoint_is_format_error(client):
    resp = client.post("/sample", json={
        "source": {"checkpoint_b64": b64(b"not a checkpoint")},
        "seed": 0,
    })
    assert resp.status_code == 400
    assert resp.json()["detail"]["kind"] == "format"


def test_unknown_body_keys_rejected(client):
    resp = client.post("/sample", json={
        "source": source_from_config(), "seed": 0, "bogus": 1,
    })
    assert resp.status_code == 422


def test_fit_round_trip(client):
    target = np.full((8, 8, 3), 0.3, np.float32)
    from polypix.image import ImageBuffer

    png = encode_png(ImageBuffer(target))
    resp = client.post("/fit", json={
        "config": {"z_dim": 4, "w_dim": 8, "levels": 2, "feature_dim": 6},
        "target_png_b64": b64(png), "steps": 40, "lr": 0.02, "seed": 2,
    })
    assert resp.status_code == 200
    body = resp.json()
    assert body["loss_history"][-1] <= body["loss_history"][0]
    loaded = ck.generator_from_bytes(unb64(body["checkpoint_b64"]))
    assert loaded.config.levels == 2


def test_train_endpoint_smoke(client):
    images = [b64(encode_png(img)) for img in blob_dataset(4, 8, seed=3)]
    resp = client.post("/train", json={
        "config": {"z_dim": 4, "w_dim": 8, "levels": 2, "feature_dim": 6},
        "images_png_b64": images,
        "schedule": [{"resolution": 4, "image_budget": 16, "batch_size": 4,
                      "generator_lr": 1e-3, "discriminator_lr": 2e-3}],
        "seed": 1, "hidden_dim": 8,
    })
    assert resp.status_code == 200
    body = resp.json()
    assert len(body["stages"]) == 1
    assert body["stages"][0]["resolution"] == 4
    ck.generator_from_bytes(unb64(body["checkpoint_b64"]))


def test_interpolate_frames_and_endpoints(client):
    resp = client.post("/interpolate", json={
        "source": source_from_config(1), "space": "latent",
        "seed_a": 10, "seed_b": 11, "frames": 3, "height": 7, "width": 7,
    })
    assert resp.status_code == 200
    frames = resp.json()["frames_png_b64"]
    assert len(frames) == 3
    first = client.post("/sample", json={
        "source": source_from_config(1), "seed": 10, "height": 7, "width": 7,
    }).json()["png_b64"]
    assert frames[0] == first


def test_interpolate_affine_space_with_uploads(client):
    gen = init_generator(small_config(), seed=1)
    from conftest import sampled_affine

    aff_a = ck.affine_bytes(sampled_affine(gen, 1))
    aff_b = ck.affine_bytes(sampled_affine(gen, 2))
    resp = client.post("/interpolate", json={
        "source": source_from_config(1), "space": "affine",
        "affine_a_b64": b64(aff_a), "affine_b_b64": b64(aff_b),
        "t": 0.5, "height": 5, "width": 5,
    })
    assert resp.status_code == 200
    assert len(resp.json()["frames_png_b64"]) == 1


def test_stylemix_extrapolate_upsample_heatmap(client):
    base = {"source": source_from_config(2)}
    resp = client.post("/stylemix", json={
        **base,
        "affine_a": {"seed": 1}, "affine_b": {"seed": 2},
        "levels": [0, 2], "height": 6, "width": 6,
    })
    assert resp.status_code == 200
    resp = client.post("/extrapolate", json={
        **base, "affine": {"seed": 3}, "margin": 0.25, "height": 7, "width": 7,
    })
    assert resp.status_code == 200
    resp = client.post("/upsample", json={
        **base, "affine": {"seed": 3}, "base_height": 4, "base_width": 4,
        "factor": 2, "mode": "nested",
    })
    assert resp.status_code == 200
    assert resp.json()["height"] == 7  # nested: 2*(4-1)+1
    resp = client.post("/heatmap", json={
        **base, "affine": {"seed": 3}, "level": 1, "height": 6, "width": 6,
    })
    assert resp.status_code == 200


def test_invert_endpoint(client):
    gen = init_generator(small_config(), seed=6)
    target = sample(gen, np.random.default_rng(3).standard_normal(8), None, 8, 8)
    resp = client.post("/invert", json={
        "source": {"checkpoint_b64": b64(ck.generator_bytes(gen))},
        "target_png_b64": b64(encode_png(target)),
        "steps": 30, "lr": 0.02,
    })
    assert resp.status_code == 200
    body = resp.json()
    affine = ck.affine_from_bytes(unb64(body["affine_b64"]))
    assert affine.levels == 4
    assert body["psnr"] > 0


def test_invalid_level_is_argument_error(client):
    resp = client.post("/heatmap", json={
        "source": source_from_config(), "affine": {"seed": 1},
        "level": 99, "height": 4, "width": 4,
    })
    assert resp.status_code == 400
    assert resp.json()["detail"]["kind"] == "argument"


def test_bench_endpoint(client):
    resp = client.post("/bench", json={
        "source": source_from_config(), "resolutions": [8, 16], "repeats": 1,
    })
    assert resp.status_code == 200
    rows = resp.json()["rows"]
    assert [r["resolution"] for r in rows] == [8, 16]
    assert all(r["seconds_per_image"] > 0 for r in rows)
