"""Test harness: drive a single VM through the real event engine with
cloudlets arriving at arbitrary times."""

from stratus import Cloudlet, Datacenter, Entity, EventTag, Host, Simulation, Vm


class StaggeredSubmitter(Entity):
    """Creates one VM, then submits cloudlets at fixed absolute times."""

    def __init__(self, sim, dc_id, vm, plan):
        super().__init__(sim)
        self.dc_id = dc_id
        self.vm = vm
        self.plan = plan  # [(arrival time, cloudlet)]
        self.rejected = False

    def start(self):
        self.send(self.dc_id, EventTag.CREATE_VM, self.vm)

    def process(self, event):
        if event.tag is EventTag.CREATE_VM_ACK:
            _, ok = event.payload
            if not ok:
                self.rejected = True
                return
            for arrival, cloudlet in self.plan:
                cloudlet.bound_vm = self.vm.id
                self.send(self.dc_id, EventTag.SUBMIT_CLOUDLET, cloudlet,
                          delay=arrival - self.sim.clock)
        # CLOUDLET_DONE notifications need no action; finish times live
        # on the cloudlets themselves


def run_staggered(policy, mips, pe_count, arrivals, lengths):
    """Run one VM under the given policy with the (sorted) arrival plan;
    returns the per-cloudlet finish times in submission order."""
    sim = Simulation()
    host = Host(0, pe_count=pe_count, mips=mips, ram=65536, bw=100000, storage=10 ** 9)
    dc = Datacenter(sim, [host])
    cloudlets = [Cloudlet(i, length) for i, length in enumerate(lengths)]
    vm = Vm(0, owner=0, mips=mips, pe_count=pe_count, scheduler=policy)
    submitter = StaggeredSubmitter(sim, dc.id, vm, list(zip(arrivals, cloudlets)))
    vm.owner = submitter.id
    sim.run()
    assert not submitter.rejected
    return [c.finish for c in cloudlets]
