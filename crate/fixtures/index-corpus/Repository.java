package demo.data;

import java.util.Optional;

public interface Repository<T, ID> {
    Optional<T> find(ID id);

    void save(T entity) throws Exception;

    @SuppressWarnings("unchecked")
    default T require(ID id) {
        return find(id).orElseThrow(() -> new IllegalStateException("missing " + id));
    }

    static boolean isNumeric(Object key) {
        return key instanceof Integer || key instanceof Long;
    }

    class Entry<T> {
        final T value;
        final long stamp;

        Entry(T value, long stamp) {
            this.value = value;
            this.stamp = stamp;
        }
    }
}
