/* The trace index law both programs follow: the k-th matched packet
 * uses table slot k mod TRACE_LEN.  Kept in one place (and host-testable)
 * because the userspace replay engine mirrors it exactly; any drift
 * between the two would silently misalign delay and loss tables. */
#ifndef TRACE_INDEX_H
#define TRACE_INDEX_H

#include <linux/types.h>

#ifndef __always_inline
#define __always_inline inline __attribute__((always_inline))
#endif

static __always_inline __u32 trace_index_peek(const __u32 *index)
{
    return *index;
}

static __always_inline void trace_index_advance(__u32 *index, __u32 trace_len)
{
    *index += 1;
    if (*index >= trace_len)
        *index = 0;
}

static __always_inline __u32 trace_index_consume(__u32 *index, __u32 trace_len)
{
    __u32 key = *index;
    trace_index_advance(index, trace_len);
    return key;
}

#endif /* TRACE_INDEX_H */
