"""Character-level encoder-decoder rewriter conditioned on a target-label token.

The source sequence is the control token for the desired word label followed by
the characters of the input word, e.g. ``<1F+B> s a E y d``. The encoder is a
bidirectional GRU, the decoder a GRU with additive attention. Inference runs a
beam search and returns the k best outputs scored by length-normalized
log-probability.
"""

from __future__ import annotations

import contextlib
import io
import logging
import math
import random
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import torch
import torch.nn as nn
import torch.nn.functional as F

from ..corpus import RewritePair
from ..labels import ALL_LABELS, WordLabel
from .candidates import NEURALR, Candidate, CandidateSet

log = logging.getLogger(__name__)

FORMAT_VERSION = 1
PAD, BOS, EOS, UNK = "<pad>", "<bos>", "<eos>", "<unk>"
SPECIALS = (PAD, BOS, EOS, UNK)


class EmptyTrainingSet(ValueError):
    pass


class UnknownCharacter(ValueError):
    pass


def control_token(label: WordLabel) -> str:
    return f"<{label}>"


CONTROL_TOKENS = tuple(control_token(l) for l in ALL_LABELS)


@dataclass
class NeuralConfig:
    embedding_size: int = 128
    hidden_size: int = 256
    layers: int = 2
    dropout: float = 0.2
    beam_width: int = 10
    kbest: int = 3
    epochs: int = 50
    batch_size: int = 32
    learning_rate: float = 5e-4
    lr_decay: float = 0.5
    lr_patience: int = 2
    early_stopping: int = 6
    grad_clip: float = 1.0
    sampling_prob: float = 0.3
    max_extra_length: int = 10
    open_vocabulary: bool = True


class Vocab:
    def __init__(self, chars: Sequence[str]):
        chars = sorted(set(chars))
        for c in chars:
            if len(c) != 1:
                raise ValueError(f"vocabulary entries must be single characters: {c!r}")
        self.itos = list(SPECIALS) + list(CONTROL_TOKENS) + chars
        self.stoi = {s: i for i, s in enumerate(self.itos)}
        self.n_chars = len(chars)

    def __len__(self):
        return len(self.itos)

    @property
    def chars(self) -> list[str]:
        return self.itos[len(SPECIALS) + len(CONTROL_TOKENS):]

    def char_ids(self, text: str, strict: bool = False) -> list[int]:
        out = []
        for c in text:
            i = self.stoi.get(c)
            if i is None:
                if strict:
                    raise UnknownCharacter(c)
                i = self.stoi[UNK]
            out.append(i)
        return out

    def encode_source(self, word: str, label: WordLabel, strict: bool = False) -> list[int]:
        return [self.stoi[control_token(label)]] + self.char_ids(word, strict) + [self.stoi[EOS]]

    def decode(self, ids: Sequence[int]) -> str:
        return "".join(self.itos[i] for i in ids)


class Seq2Seq(nn.Module):
    def __init__(self, vocab_size: int, cfg: NeuralConfig):
        super().__init__()
        E, H, L = cfg.embedding_size, cfg.hidden_size, cfg.layers
        self.layers = L
        self.src_embed = nn.Embedding(vocab_size, E, padding_idx=0)
        self.tgt_embed = nn.Embedding(vocab_size, E, padding_idx=0)
        self.encoder = nn.GRU(E, H, num_layers=L, bidirectional=True, batch_first=True,
                              dropout=cfg.dropout if L > 1 else 0.0)
        self.bridge = nn.Linear(2 * H, H)
        self.att_enc = nn.Linear(2 * H, H, bias=False)
        self.att_dec = nn.Linear(H, H)
        self.att_v = nn.Linear(H, 1, bias=False)
        self.decoder = nn.GRU(E + 2 * H, H, num_layers=L, batch_first=True,
                              dropout=cfg.dropout if L > 1 else 0.0)
        self.drop = nn.Dropout(cfg.dropout)
        self.out = nn.Linear(H + 2 * H, vocab_size)

    def encode(self, src: torch.Tensor, lengths: torch.Tensor):
        emb = self.src_embed(src)
        packed = nn.utils.rnn.pack_padded_sequence(emb, lengths.cpu(), batch_first=True, enforce_sorted=False)
        out, h = self.encoder(packed)
        out, _ = nn.utils.rnn.pad_packed_sequence(out, batch_first=True, total_length=src.size(1))
        out = self.drop(out)
        # h: (L*2, B, H) -> per layer concat of both directions
        h = h.view(self.layers, 2, h.size(1), h.size(2))
        h0 = torch.tanh(self.bridge(torch.cat([h[:, 0], h[:, 1]], dim=-1)))
        mask = src != 0
        return out, self.att_enc(out), mask, h0.contiguous()

    def step(self, y_prev, hidden, enc_out, enc_proj, mask):
        query = self.att_dec(hidden[-1]).unsqueeze(1)
        energy = self.att_v(torch.tanh(enc_proj + query)).squeeze(-1)
        energy = energy.masked_fill(~mask, -1e9)
        attn = torch.softmax(energy, dim=-1)
        ctx = torch.bmm(attn.unsqueeze(1), enc_out).squeeze(1)
        inp = torch.cat([self.tgt_embed(y_prev), ctx], dim=-1).unsqueeze(1)
        out, hidden = self.decoder(inp, hidden)
        out = self.drop(out.squeeze(1))
        logits = self.out(torch.cat([out, ctx], dim=-1))
        return logits, hidden


def _pad(seqs: list[list[int]]) -> tuple[torch.Tensor, torch.Tensor]:
    lengths = torch.tensor([len(s) for s in seqs], dtype=torch.long)
    out = torch.zeros(len(seqs), int(lengths.max()), dtype=torch.long)
    for i, s in enumerate(seqs):
        out[i, : len(s)] = torch.tensor(s, dtype=torch.long)
    return out, lengths


@contextlib.contextmanager
def _single_thread():
    n = torch.get_num_threads()
    torch.set_num_threads(1)
    try:
        yield
    finally:
        torch.set_num_threads(n)


class NeuralRewriter:
    def __init__(self, vocab: Vocab, config: NeuralConfig, net: Optional[Seq2Seq] = None, seed: int = 0):
        self.vocab = vocab
        self.config = config
        self.seed = seed
        self.net = net if net is not None else Seq2Seq(len(vocab), config)
        self.net.eval()
        self.history: list[float] = []
        banned = [vocab.stoi[s] for s in (PAD, BOS, UNK)] + [vocab.stoi[c] for c in CONTROL_TOKENS]
        self._banned = torch.tensor(banned, dtype=torch.long)

    # --- training ------------------------------------------------------------
    def _loss(self, batch, sampling_prob: float, gen: Optional[torch.Generator]):
        src, src_len, tgt = batch
        enc_out, enc_proj, mask, hidden = self.net.encode(src, src_len)
        y = tgt[:, 0]
        total = torch.zeros(())
        count = 0
        for t in range(1, tgt.size(1)):
            logits, hidden = self.net.step(y, hidden, enc_out, enc_proj, mask)
            gold = tgt[:, t]
            live = gold != 0
            total = total + F.cross_entropy(logits[live], gold[live], reduction="sum")
            count += int(live.sum())
            if sampling_prob > 0 and gen is not None:
                use_pred = torch.rand(gold.size(0), generator=gen) < sampling_prob
                y = torch.where(use_pred, logits.argmax(-1).detach(), gold)
            else:
                y = gold
        return total, count

    def _batches(self, data, shuffle: bool, rng: Optional[random.Random]):
        order = list(range(len(data)))
        if shuffle:
            rng.shuffle(order)
        bs = self.config.batch_size
        for i in range(0, len(order), bs):
            chunk = [data[j] for j in order[i: i + bs]]
            src, src_len = _pad([c[0] for c in chunk])
            tgt, _ = _pad([c[1] for c in chunk])
            yield src, src_len, tgt

    def _encode_pairs(self, pairs: Sequence[RewritePair]):
        strict = not self.config.open_vocabulary
        bos, eos = self.vocab.stoi[BOS], self.vocab.stoi[EOS]
        return [(self.vocab.encode_source(p.source, p.target_label, strict),
                 [bos] + self.vocab.char_ids(p.target_surface, strict) + [eos]) for p in pairs]

    def evaluate_loss(self, pairs: Sequence[RewritePair]) -> float:
        data = self._encode_pairs(pairs)
        self.net.eval()
        total, count = 0.0, 0
        with torch.no_grad():
            for batch in self._batches(data, False, None):
                loss, n = self._loss(batch, 0.0, None)
                total += float(loss.detach())
                count += n
        return total / max(count, 1)

    def fit(self, pairs: Sequence[RewritePair], dev: Optional[Sequence[RewritePair]] = None) -> list[float]:
        cfg = self.config
        data = self._encode_pairs(pairs)
        rng = random.Random(self.seed)
        gen = torch.Generator().manual_seed(self.seed)
        opt = torch.optim.Adam(self.net.parameters(), lr=cfg.learning_rate)
        sched = torch.optim.lr_scheduler.ReduceLROnPlateau(opt, mode="min", factor=cfg.lr_decay,
                                                           patience=cfg.lr_patience)
        best, best_state, bad_epochs = math.inf, None, 0
        for epoch in range(cfg.epochs):
            self.net.train()
            total, count = 0.0, 0
            for batch in self._batches(data, True, rng):
                opt.zero_grad()
                loss, n = self._loss(batch, cfg.sampling_prob, gen)
                (loss / max(n, 1)).backward()
                nn.utils.clip_grad_norm_(self.net.parameters(), cfg.grad_clip)
                opt.step()
                total += float(loss.detach())
                count += n
            train_loss = total / max(count, 1)
            self.history.append(train_loss)
            monitor = self.evaluate_loss(dev) if dev else train_loss
            sched.step(monitor)
            log.debug("neuralr epoch %d train %.4f monitor %.4f", epoch + 1, train_loss, monitor)
            if monitor < best - 1e-6:
                best, bad_epochs = monitor, 0
                best_state = {k: v.clone() for k, v in self.net.state_dict().items()}
            else:
                bad_epochs += 1
                if bad_epochs >= cfg.early_stopping:
                    break
        if best_state is not None:
            self.net.load_state_dict(best_state)
        self.net.eval()
        return self.history

    # --- inference -----------------------------------------------------------
    @torch.no_grad()
    def beam_search(self, word: str, label: WordLabel) -> list[tuple[str, float]]:
        """All finished hypotheses of a width-``beam_width`` search, best first."""
        self.net.eval()
        cfg = self.config
        width = cfg.beam_width
        src, src_len = _pad([self.vocab.encode_source(word, label)])
        enc_out, enc_proj, mask, hidden = self.net.encode(src, src_len)
        eos, bos = self.vocab.stoi[EOS], self.vocab.stoi[BOS]
        max_len = len(word) + cfg.max_extra_length

        beams: list[tuple[list[int], float]] = [([], 0.0)]
        finished: list[tuple[str, float]] = []
        ys = torch.tensor([bos])
        for t in range(max_len + 1):
            n = len(beams)
            logits, hidden = self.net.step(ys, hidden, enc_out.expand(n, -1, -1),
                                           enc_proj.expand(n, -1, -1), mask.expand(n, -1))
            logp = torch.log_softmax(logits, dim=-1)
            logp[:, self._banned] = -math.inf
            if t == max_len:
                # force termination
                keep = logp[:, eos].clone()
                logp.fill_(-math.inf)
                logp[:, eos] = keep
            total = torch.tensor([b[1] for b in beams]).unsqueeze(1) + logp
            flat = total.view(-1)
            k = min(width, int(torch.isfinite(flat).sum()))
            if k == 0:
                break
            # stable order: ties resolved by lowest flat index
            scores, idx = torch.sort(flat, descending=True, stable=True)
            new_beams, parents = [], []
            for score, i in zip(scores[:k].tolist(), idx[:k].tolist()):
                b, c = divmod(i, logp.size(1))
                seq = beams[b][0]
                if c == eos:
                    finished.append((self.vocab.decode(seq), score / (len(seq) + 1)))
                else:
                    new_beams.append((seq + [c], score))
                    parents.append(b)
            if len(finished) >= width or not new_beams:
                break
            beams = new_beams
            hidden = hidden[:, parents]
            ys = torch.tensor([s[-1] for s, _ in beams])
        finished.sort(key=lambda h: (-h[1], h[0]))
        return finished

    def kbest(self, word: str, label: WordLabel) -> CandidateSet:
        seen, out = set(), []
        for surface, score in self.beam_search(word, label):
            if not surface or surface in seen or any(ch.isspace() for ch in surface):
                continue
            seen.add(surface)
            out.append(Candidate(surface, score, NEURALR))
            if len(out) == self.config.kbest:
                break
        if not out:
            out.append(Candidate(word, -1e9, NEURALR))
        return CandidateSet.build(out)

    def top1(self, word: str, label: WordLabel) -> str:
        return self.kbest(word, label).candidates[0].surface

    # --- serialization ---------------------------------------------------------
    def save(self, path) -> None:
        state = {
            "format": "neuralr",
            "version": FORMAT_VERSION,
            "config": asdict(self.config),
            "chars": self.vocab.chars,
            "seed": self.seed,
            "history": self.history,
            "state_dict": self.net.state_dict(),
        }
        buf = io.BytesIO()
        torch.save(state, buf)
        Path(path).write_bytes(buf.getvalue())

    @classmethod
    def load(cls, path) -> "NeuralRewriter":
        state = torch.load(path, map_location="cpu", weights_only=True)
        if state.get("format") != "neuralr" or state.get("version") != FORMAT_VERSION:
            raise ValueError("not a NeuralR model file (or unsupported version)")
        config = NeuralConfig(**state["config"])
        model = cls(Vocab(state["chars"]), config, seed=state["seed"])
        model.net.load_state_dict(state["state_dict"])
        model.net.eval()
        model.history = list(state["history"])
        return model


def train_neuralr(pairs: Sequence[RewritePair], config: Optional[NeuralConfig] = None, seed: int = 0,
                  dev: Optional[Sequence[RewritePair]] = None) -> NeuralRewriter:
    if not pairs:
        raise EmptyTrainingSet("NeuralR needs at least one training pair")
    config = config or NeuralConfig()
    chars = {c for p in pairs for c in p.source + p.target_surface}
    with torch.random.fork_rng(devices=[]), _single_thread():
        torch.manual_seed(seed)
        model = NeuralRewriter(Vocab(chars), config, seed=seed)
        model.fit(pairs, dev)
    return model


def neuralr_kbest(model: NeuralRewriter, word: str, target: WordLabel) -> CandidateSet:
    return model.kbest(word, target)
