package demo.shop;

public enum Order {
    NEW("n"), PAID("p"), SHIPPED("s");

    private final String code;

    Order(String code) {
        this.code = code;
    }

    public Order next() {
        switch (this) {
            case NEW:
                return PAID;
            case PAID:
                return SHIPPED;
            default:
                return this;
        }
    }

    public static Order parse(String größe) {
        for (Order o : values()) {
            if (o.code.equals(größe)) {
                return o;
            }
        }
        throw new IllegalArgumentException("unknown: " + größe);
    }
}
