#!/usr/bin/env python3
"""Process classifier backed by HuggingFace transformers.

Reads one JSON request on stdin and writes one JSON response on stdout:

    request:  {"model_id", "revision", "task", "labels", "inputs": [{"text", "aspect"}]}
    response: {"scores": [[...], ...]} in the order of "labels"
          or: {"error": {"kind": "missing" | "version_mismatch" | "backend", "message", "available"}}

Usage in a run config:

    [models]
    command = ["python3", "scripts/hf_classifier.py"]
    mask_token = "[MASK]"
"""

import json
import sys


def fail(kind, message, available=None):
    json.dump({"error": {"kind": kind, "message": message, "available": available}}, sys.stdout)
    sys.exit(0)


def load(model_id, revision):
    try:
        from transformers import AutoModelForSequenceClassification, AutoTokenizer
    except ImportError as e:
        fail("backend", f"transformers is not installed: {e}")
    try:
        tokenizer = AutoTokenizer.from_pretrained(model_id, revision=revision)
        model = AutoModelForSequenceClassification.from_pretrained(model_id, revision=revision)
    except OSError as e:
        text = str(e)
        if "revision" in text or "git identifier" in text:
            fail("version_mismatch", text, None)
        fail("missing", text)
    model.eval()
    return tokenizer, model


def main():
    request = json.load(sys.stdin)
    labels = request["labels"]
    tokenizer, model = load(request["model_id"], request["revision"])

    id2label = {int(k): v for k, v in model.config.id2label.items()}
    lookup = {v.lower(): k for k, v in id2label.items()}
    try:
        order = [lookup[label.lower()] for label in labels]
    except KeyError as e:
        fail("backend", f"model has no label {e}; it has {sorted(id2label.values())}")

    import torch

    scores = []
    with torch.no_grad():
        for item in request["inputs"]:
            if item.get("aspect") is None:
                enc = tokenizer(item["text"], truncation=True, return_tensors="pt")
            else:
                enc = tokenizer(item["text"], item["aspect"], truncation=True, return_tensors="pt")
            probs = torch.softmax(model(**enc).logits[0], dim=-1).tolist()
            scores.append([probs[i] for i in order])
    json.dump({"scores": scores}, sys.stdout)


if __name__ == "__main__":
    main()
