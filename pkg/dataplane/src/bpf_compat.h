/* Minimal BPF program support, vendored so the programs build straight
 * against the kernel uapi headers without a libbpf installation.  Only
 * what these two programs use: section placement, BTF map declaration
 * macros, and two helper call stubs (ids from the uapi helper list). */
#ifndef BPF_COMPAT_H
#define BPF_COMPAT_H

#include <linux/types.h>

#ifndef SEC
#define SEC(name) __attribute__((section(name), used))
#endif

#define __uint(name, val) int (*name)[val]
#define __type(name, val) typeof(val) *name

static void *(*bpf_map_lookup_elem)(void *map, const void *key) = (void *)1;
static __u64 (*bpf_ktime_get_ns)(void) = (void *)5;

char _license[] SEC("license") = "GPL";

#endif /* BPF_COMPAT_H */
