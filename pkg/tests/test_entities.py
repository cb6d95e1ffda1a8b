"""Protocol behavior: registration, discovery, deployment, binding,
completion and the conservation of cloudlets."""

import dataclasses
import random

from stratus import (Broker, Cloudlet, CloudletStatus, Datacenter, Host,
                     InformationService, Simulation, Vm)
from stratus.scenario import bundled_scenario_path, build_simulation, parse_scenario


def scenario(name):
    return parse_scenario(bundled_scenario_path(name))


def quad_dual_hosts():
    return [Host(0, pe_count=4, mips=1000.0, ram=16384, bw=10000, storage=1000000),
            Host(1, pe_count=2, mips=1000.0, ram=16384, bw=10000, storage=1000000)]


def test_registration_order_defines_provider_order():
    sim = Simulation()
    dc_a = Datacenter(sim, quad_dual_hosts())
    dc_b = Datacenter(sim, quad_dual_hosts())
    broker = Broker(sim)
    sim.run()
    assert broker.provider_list == [dc_a.id, dc_b.id] == [2, 3]


def test_duplicate_registration_is_idempotent():
    sim = Simulation()
    cis = sim.entity(1)
    assert isinstance(cis, InformationService)
    cis.register(7)
    cis.register(7)
    assert cis.registry == [7]


def test_provider_list_arrives_one_hop_after_start():
    events = []
    sim = Simulation(trace=events.append)
    Datacenter(sim, quad_dual_hosts())
    Broker(sim)
    sim.run()
    provider_lines = [e for e in events if "PROVIDER_LIST" in e]
    assert provider_lines and provider_lines[0].startswith("0.1\t")


def test_no_registered_datacenters_fails_every_cloudlet():
    sim = Simulation()
    broker = Broker(sim)
    broker.submit_vm_list([Vm(0, broker.id, 1000.0)])
    broker.submit_cloudlet_list([Cloudlet(0, 1000.0), Cloudlet(1, 1000.0)])
    sim.run()
    assert broker.created_vms == []
    assert all(c.status is CloudletStatus.FAILED for c in broker.cloudlets)


def test_deployment_split_across_providers():
    # 20 single-PE VMs against two providers of 6 PEs each
    sim, dcs, broker, vms, _ = build_simulation(
        dataclasses.replace(scenario("scenario_a"), cloudlets=dataclasses.replace(
            scenario("scenario_a").cloudlets, count=0)))
    sim.run()
    created = [vm.id for vm in broker.created_vms]
    assert created == list(range(12))
    assert [broker.creation_results[i] for i in created] == [2] * 6 + [3] * 6
    assert sorted(vm.id for vm in broker.failed_vms) == list(range(12, 20))
    assert all(broker.creation_results[i] is None for i in range(12, 20))


def test_single_vm_with_ample_capacity_lands_on_first_provider():
    sim = Simulation()
    dc = Datacenter(sim, quad_dual_hosts())
    Datacenter(sim, quad_dual_hosts())
    broker = Broker(sim)
    broker.submit_vm_list([Vm(0, broker.id, 1000.0)])
    sim.run()
    assert broker.creation_results[0] == dc.id == 2


def test_vm_wider_than_any_host_fails_everywhere():
    sim = Simulation()
    Datacenter(sim, quad_dual_hosts())
    Datacenter(sim, quad_dual_hosts())
    broker = Broker(sim)
    broker.submit_vm_list([Vm(0, broker.id, 1000.0, pe_count=5)])
    sim.run()
    assert broker.created_vms == []
    assert [vm.id for vm in broker.failed_vms] == [0]


def test_round_robin_binding_residues():
    report_cfg = scenario("scenario_a")
    sim, dcs, broker, vms, cloudlets = build_simulation(report_cfg)
    sim.run()
    ring = [vm.id for vm in broker.created_vms]
    assert ring == list(range(12))
    for c in cloudlets:
        assert c.bound_vm == c.id % 12


def test_scenario_a_cloudlet_finishes_match_reference():
    cfg = scenario("scenario_a")
    sim, dcs, broker, vms, cloudlets = build_simulation(cfg)
    sim.run()
    by_id = {c.id: c for c in cloudlets}
    assert by_id[4].status is CloudletStatus.SUCCESS
    assert by_id[4].finish == 3.2
    assert by_id[3].finish == 4.2
    assert all(c.exec_start == 0.2 for c in cloudlets)


def test_scenario_b_cloudlet_40_finish_near_reference_value():
    cfg = scenario("scenario_b")
    sim, dcs, broker, vms, cloudlets = build_simulation(cfg)
    sim.run()
    c40 = next(c for c in cloudlets if c.id == 40)
    assert abs(c40.finish - 13.19) <= 0.2


def test_every_submitted_cloudlet_reaches_exactly_one_terminal_status():
    rng = random.Random(3)
    base = scenario("scenario_a")
    for _ in range(10):
        cfg = dataclasses.replace(
            base,
            vms=dataclasses.replace(base.vms, count=rng.randint(0, 25)),
            cloudlets=dataclasses.replace(base.cloudlets, count=rng.randint(0, 60)))
        sim, dcs, broker, vms, cloudlets = build_simulation(cfg)
        sim.run()
        terminal = [c for c in cloudlets
                    if c.status in (CloudletStatus.SUCCESS, CloudletStatus.FAILED,
                                    CloudletStatus.CANCELED)]
        assert len(terminal) == len(cloudlets)


def test_multi_pe_cloudlet_rejected_at_submission():
    sim = Simulation()
    Datacenter(sim, quad_dual_hosts())
    broker = Broker(sim)
    broker.submit_vm_list([Vm(0, broker.id, 1000.0)])
    wide = Cloudlet(0, 1000.0, pes_required=2)
    narrow = Cloudlet(1, 1000.0)
    broker.submit_cloudlet_list([wide, narrow])
    sim.run()
    assert wide.status is CloudletStatus.FAILED
    assert narrow.status is CloudletStatus.SUCCESS


def test_hosts_never_exceed_capacity_during_run():
    cfg = scenario("scenario_b")
    sim, dcs, broker, vms, cloudlets = build_simulation(cfg)

    checked = []

    class Watcher:
        def __call__(self, line):
            for dc in dcs:
                for host in dc.hosts:
                    used_pes = sum(vm.pe_count for vm in host.placed_vms)
                    assert used_pes <= len(host.pes)
                    assert sum(vm.ram for vm in host.placed_vms) <= host.ram
                    assert sum(vm.bw for vm in host.placed_vms) <= host.bw
                    assert host.free_pes == len(host.pes) - used_pes
            checked.append(line)

    sim._trace = Watcher()
    sim.run()
    assert checked


def test_vms_destroyed_after_completion():
    cfg = scenario("scenario_a")
    sim, dcs, broker, vms, cloudlets = build_simulation(cfg)
    sim.run()
    for dc in dcs:
        for host in dc.hosts:
            assert host.placed_vms == []
    assert all(vm.placement is None for vm in broker.created_vms)


def test_status_transitions_only_move_forward():
    import pytest

    c = Cloudlet(0, 1000.0)
    c.set_status(CloudletStatus.QUEUED)
    c.mark_running(0.2)
    with pytest.raises(ValueError):
        c.set_status(CloudletStatus.QUEUED)  # backward
    c.mark_success(1.2)
    with pytest.raises(ValueError):
        c.mark_running(2.0)  # terminal statuses are absorbing
    failed = Cloudlet(1, 1000.0)
    failed.mark_failed()  # Created -> Failed is legal (never deployed)
    assert failed.status is CloudletStatus.FAILED


def test_work_conservation_host_integral_equals_total_mi():
    cfg = scenario("scenario_a")
    sim, dcs, broker, vms, cloudlets = build_simulation(cfg)
    sim.run()
    integrated = sum(host.mi_integral for dc in dcs for host in dc.hosts)
    executed = sum(c.length for c in cloudlets if c.status is CloudletStatus.SUCCESS)
    assert integrated == int(executed) or abs(integrated - executed) <= 1e-6 * executed
