#!/usr/bin/env python3
"""Export torchvision's ImageNet VGG16 trunk (conv1_1 .. conv4_1) to a jpr tensor archive.

    python3 tools/export_vgg16.py vgg16_conv4_1.jpra
    export JPR_VGG16_WEIGHTS=$PWD/vgg16_conv4_1.jpra

Needs torchvision and network access to download the weights once, or
--state-dict pointing at a local vgg16-*.pth file.
"""

import argparse
import json
import struct
import zlib

import torch

FEATURE_INDICES = [0, 2, 5, 7, 10, 12, 14, 17]
MAGIC = b"JPRARCH1"
VERSION = 1


def load_state_dict(path):
    if path:
        return torch.load(path, map_location="cpu")
    from torchvision.models import VGG16_Weights, vgg16

    return vgg16(weights=VGG16_Weights.IMAGENET1K_V1).state_dict()


def encode(tensors, meta):
    table, blobs, offset = [], [], 0
    for name, t in tensors:
        data = t.detach().to(torch.float32).contiguous().numpy().tobytes()
        table.append({"name": name, "dtype": "f32", "shape": list(t.shape), "offset": offset, "nbytes": len(data)})
        blobs.append(data)
        offset += len(data)
    header = json.dumps({"meta": meta, "tensors": table}).encode()
    body = MAGIC + struct.pack("<IQ", VERSION, len(header)) + header + b"".join(blobs)
    return body + struct.pack("<I", zlib.crc32(body) & 0xFFFFFFFF)


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("out")
    ap.add_argument("--state-dict", help="local torchvision vgg16 .pth file")
    args = ap.parse_args()

    sd = load_state_dict(args.state_dict)
    tensors = []
    for i in FEATURE_INDICES:
        for kind in ("weight", "bias"):
            key = f"features.{i}.{kind}"
            tensors.append((key, sd[key]))
    meta = {"network": "vgg16", "layer": "conv4_1", "source": "torchvision IMAGENET1K_V1"}
    with open(args.out, "wb") as f:
        f.write(encode(tensors, meta))
    print(f"wrote {len(tensors)} tensors to {args.out}")


if __name__ == "__main__":
    main()
