# -*- coding: utf-8 -*-
import os
import shutil
import unittest

import lossyrepair
from lossyrepair import codesim
from lossyrepair import SystemParams
from lossyrepair.analysis import cut_value
from lossyrepair.field import FieldSpec, FqMatrix, stack
from lossyrepair.util import serialize, deserialize


def vandermonde_repair_fn(state, stage, failed, seed):
    return codesim.vandermonde_repair(state, failed, seed)


class TestRandomCode(unittest.TestCase):

    def setUp(self):
        self.workdir = "/tmp/lossyrepair_testdir"
        if not os.path.isdir(self.workdir):
            os.mkdir(self.workdir)
        self.params = SystemParams(n=4, k=2, d=3, alpha=3, beta=1, M=5)
        self.field = FieldSpec(256)

    def tearDown(self):
        if os.path.isdir(self.workdir):
            shutil.rmtree(self.workdir)

    def test_init_random_code(self):
        state = codesim.init_random_code(self.params, self.field, seed=3)
        self.assertEqual(sorted(state.nodes), [0, 1, 2, 3])
        self.assertEqual(state.nodes[0].rows, 3)
        self.assertEqual(state.nodes[0].cols, 5)
        self.assertEqual(state.stage, 0)
        self.assertEqual(codesim.check_reconstruction(state), (True, None))

        again = codesim.init_random_code(self.params, self.field, seed=3)
        self.assertEqual(again.to_json(), state.to_json())
        other = codesim.init_random_code(self.params, self.field, seed=4)
        self.assertNotEqual(other.to_json(), state.to_json())

    def test_functional_repair(self):
        state = codesim.init_random_code(self.params, self.field, seed=3)
        repaired, transcript = codesim.functional_repair(state, 1, [0, 2, 3], seed=9)
        self.assertEqual(repaired.stage, 1)
        self.assertEqual(transcript.failed, 1)
        self.assertEqual(sorted(transcript.sent), [0, 2, 3])
        self.assertEqual(transcript.sent[0].rows, 1)
        self.assertEqual((transcript.mixing.rows, transcript.mixing.cols), (3, 3))
        self.assertEqual(codesim.check_reconstruction(repaired), (True, None))
        self.assertEqual(state.stage, 0)
        self.assertEqual(sorted(transcript.to_json()["sent"]), ["0", "2", "3"])

        again, _ = codesim.functional_repair(state, 1, [0, 2, 3], seed=9)
        self.assertEqual(again.to_json(), repaired.to_json())

    def test_repair_errors(self):
        state = codesim.init_random_code(self.params, self.field, seed=3)
        with self.assertRaises(lossyrepair.DomainError):
            codesim.functional_repair(state, 7, [0, 2, 3], seed=1)
        with self.assertRaises(lossyrepair.DomainError):
            codesim.functional_repair(state, 1, [1, 2, 3], seed=1)
        with self.assertRaises(lossyrepair.DomainError):
            codesim.functional_repair(state, 1, [0, 0, 2], seed=1)
        with self.assertRaises(lossyrepair.DomainError):
            codesim.functional_repair(state, 1, [0, 2, 9], seed=1)

    def test_cut_bound(self):
        params = SystemParams(n=4, k=2, d=3, alpha=4, beta=1, M=8)
        state = codesim.init_random_code(params, self.field, seed=5)
        with self.assertRaises(lossyrepair.InfeasibleError):
            codesim.functional_repair(state, 0, [1, 2, 3], seed=5)

    def test_round_robin_default(self):
        state = codesim.init_random_code(self.params, self.field, seed=2)
        states = codesim.round_robin_repairs(state, 6, seed=2)
        self.assertEqual([s.stage for s in states], [1, 2, 3, 4, 5, 6])
        for s in states:
            self.assertTrue(codesim.check_reconstruction(s)[0])

    def test_state_json(self):
        state = codesim.init_random_code(self.params, self.field, seed=3)
        path = os.path.join(self.workdir, "state.json")
        with open(path, "w") as f:
            serialize(state.to_json(), to_fp=f)
        with open(path) as f:
            loaded = codesim.StorageState.from_json(deserialize(from_fp=f))
        self.assertEqual(loaded.nodes, state.nodes)
        self.assertEqual(loaded.params, state.params)
        self.assertEqual(loaded.field, state.field)

    def test_small_field_fails(self):
        params = SystemParams(n=10, k=5, d=9, alpha=2, beta=1, M=10)
        with self.assertRaises(lossyrepair.ConstructionError) as cm:
            codesim.init_random_code(params, FieldSpec(2), seed=1, attempts=4)
        self.assertEqual(cm.exception.q, 2)

    def test_feasibility_follows_cut(self):
        for alpha in (2, 3):
            for M in range(alpha + 1, 2 * alpha + 1):
                params = SystemParams(n=4, k=2, d=3, alpha=alpha, beta=1, M=M)
                state = codesim.init_random_code(params, self.field, seed=M)
                for helpers in ([1, 2], [1, 2, 3]):
                    feasible = cut_value(2, alpha, 1, len(helpers)) >= M
                    if feasible:
                        repaired, _ = codesim.functional_repair(state, 0, helpers, seed=alpha)
                        self.assertTrue(codesim.check_reconstruction(repaired)[0])
                    else:
                        with self.assertRaises(lossyrepair.InfeasibleError):
                            codesim.functional_repair(state, 0, helpers, seed=alpha)

    def test_transcript_json(self):
        state = codesim.init_random_code(self.params, self.field, seed=3)
        repaired, transcript = codesim.functional_repair(state, 1, [0, 2, 3], seed=9)
        path = os.path.join(self.workdir, "transcript.json")
        with open(path, "w") as f:
            serialize(transcript.to_json(), to_fp=f)
        with open(path) as f:
            loaded = codesim.RepairTranscript.from_json(deserialize(from_fp=f))
        self.assertEqual(loaded, transcript)
        # replaying the transcript rebuilds the newcomer
        received = stack([loaded.sent[h] for h in (0, 2, 3)], self.field)
        self.assertEqual(loaded.mixing @ received, repaired.nodes[1])


class TestVandermondeCode(unittest.TestCase):

    def test_construct(self):
        state = codesim.construct_msr_vandermonde(5, 2)
        self.assertEqual(state.field.q, 23)
        self.assertEqual(state.file_dim, 8)
        self.assertEqual(state.nodes[0].rows, 4)
        self.assertEqual(state.helpers[codesim.REPAIRING_ID].rows, 1)
        self.assertEqual(codesim.construct_msr_vandermonde(3, 2).field.q, 7)
        self.assertEqual(codesim.construct_msr_vandermonde(4, 2).field.q, 13)
        with self.assertRaises(lossyrepair.DomainError):
            codesim.construct_msr_vandermonde(5, 2, FieldSpec(7))
        with self.assertRaises(lossyrepair.DomainError):
            codesim.construct_msr_vandermonde(3, 3)

    def test_sequential_repairs(self):
        for n in (3, 4, 5):
            state = codesim.construct_msr_vandermonde(n, 2)
            self.assertEqual(codesim.check_reconstruction(state), (True, None))
            states = codesim.round_robin_repairs(state, 2 * n, seed=n,
                                                 repair=vandermonde_repair_fn)
            self.assertEqual(len(states), 2 * n)
            for s in states:
                self.assertEqual(codesim.check_reconstruction(s), (True, None))
            # the repairing node keeps its row
            self.assertEqual(states[-1].helpers, state.helpers)

    def test_missing_helper(self):
        state = codesim.construct_msr_vandermonde(4, 2)
        with self.assertRaises(lossyrepair.InfeasibleError):
            codesim.vandermonde_repair(state, 0, seed=1, helpers=[1, 2, codesim.REPAIRING_ID])

    def test_wrong_state(self):
        params = SystemParams(n=4, k=2, d=3, alpha=3, beta=1, M=5)
        state = codesim.init_random_code(params, FieldSpec(256), seed=1)
        with self.assertRaises(lossyrepair.DomainError):
            codesim.vandermonde_repair(state, 0, seed=1)


class TestRepairingNodeLifecycle(unittest.TestCase):

    def test_enough_storage(self):
        state = codesim.init_mbr_helper_code(6, 3, 5, 1, FieldSpec(256), seed=7)
        self.assertEqual(state.file_dim, 15)
        self.assertEqual(state.params.alpha, 6)
        self.assertEqual(state.params.alpha_prime, 3)
        self.assertEqual(state.helpers[codesim.REPAIRING_ID].rank(), 0)
        states = codesim.round_robin_repairs(state, 8, seed=7,
                                             repair=codesim.mbr_helper_lifecycle)
        self.assertEqual(states[0].helpers[codesim.REPAIRING_ID].rank(), 1)
        self.assertEqual(states[2].helpers[codesim.REPAIRING_ID].rank(), 3)
        self.assertEqual(states[-1].helpers[codesim.REPAIRING_ID],
                         states[2].helpers[codesim.REPAIRING_ID])
        for s in states:
            self.assertTrue(codesim.check_reconstruction(s)[0])

    def test_short_storage_fails(self):
        state = codesim.init_mbr_helper_code(6, 3, 5, 1, FieldSpec(256), seed=7,
                                             alpha_prime=2)
        with self.assertRaises(lossyrepair.ConstructionError) as cm:
            codesim.round_robin_repairs(state, 8, seed=7,
                                        repair=codesim.mbr_helper_lifecycle)
        self.assertEqual(cm.exception.q, 256)

    def test_stage_must_follow_state(self):
        state = codesim.init_mbr_helper_code(6, 3, 5, 1, FieldSpec(256), seed=7)
        with self.assertRaises(lossyrepair.DomainError):
            codesim.mbr_helper_lifecycle(state, 5, 0, 3)
        with self.assertRaises(lossyrepair.DomainError):
            codesim.mbr_helper_lifecycle(state, 0, 0, 3)

    def test_same_seed_same_state(self):
        state = codesim.init_mbr_helper_code(6, 3, 5, 1, FieldSpec(256), seed=7)
        self.assertEqual(codesim.init_mbr_helper_code(6, 3, 5, 1, FieldSpec(256), seed=7).to_json(),
                         state.to_json())
        transcripts = []
        first = codesim.mbr_helper_lifecycle(state, 1, 0, 3, transcripts=transcripts)
        second = codesim.mbr_helper_lifecycle(state, 1, 0, 3)
        self.assertEqual(first.to_json(), second.to_json())
        self.assertEqual(len(transcripts), 1)
        stored = first.helpers[codesim.REPAIRING_ID]
        self.assertEqual(transcripts[0].sent[codesim.REPAIRING_ID],
                         FqMatrix(stored.field, stored.array[:1]))


if __name__ == '__main__':
    unittest.main()
